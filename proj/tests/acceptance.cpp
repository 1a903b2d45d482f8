// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Iteration counts and tolerances are the full ones; the unit
// suites cover the same ground with smaller loops and finer diagnostics.

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "lbk/attention.hpp"
#include "lbk/blending.hpp"
#include "lbk/error.hpp"
#include "lbk/formats.hpp"
#include "lbk/fusion.hpp"
#include "lbk/metrics.hpp"
#include "lbk/normalization.hpp"
#include "lbk/npy.hpp"
#include "lbk/sandbox.hpp"
#include "support/eval_tables.hpp"
#include "support/oracles.hpp"
#include "support/scratch.hpp"

using namespace lbk;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = LBK_TEST_FIXTURES;
const fs::path kData = LBK_TEST_DATA;

// Collects expectations; remembers the first failure for the report line.
class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && first_failure_.empty()) first_failure_ = what;
    failed_ += !ok;
  }
  template <class Fn>
  void expect_error(ErrorKind kind, const std::string& what, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      expect(e.kind() == kind, what + ": got " + std::string(to_string(e.kind())));
      return;
    }
    expect(false, what + ": no error");
  }
  void note(std::string s) { notes_ += (notes_.empty() ? "" : ", ") + std::move(s); }

  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream os;
    os << checks_ << " checks";
    if (!notes_.empty()) os << ", " << notes_;
    if (failed_) os << "; " << failed_ << " failed, first: " << first_failure_;
    return os.str();
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failed_ = 0;
  std::string first_failure_;
  std::string notes_;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

Matrix positive_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(0.05, 1.5);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = u(rng);
  }
  return m;
}

double worst_row_sum_error(const Matrix& w) {
  double worst = 0.0;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    long double s = 0.0L;
    for (double x : w.row(r)) s += x;
    worst = std::max(worst, static_cast<double>(std::abs(s - 1.0L)));
  }
  return worst;
}

// ---- 1 -------------------------------------------------------------------

void table_arithmetic(Tally& t) {
  double worst = 0.0;
  const auto run_table = [&](const char* label, const tables::Row* rows, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      const tables::Row& r = rows[i];
      const std::string where = std::string(label) + " row " + std::to_string(i);
      // A dash marks an unused style: weight zero, so its value is irrelevant.
      const double a = std::isnan(r.ms_med) ? 0.0 : r.ms_med;
      const double b = std::isnan(r.ms_cub) ? 0.0 : r.ms_cub;
      const double ms[] = {a, b};
      const double w[] = {r.w_med, r.w_cub};
      const double direct = weighted_multi_style(ms, w);

      // The same numbers through the embedding path: the unit vector
      // (a, b, sqrt(1 - a^2 - b^2)) has cosine a with e1 and b with e2.
      const EmbeddingSet es(
          {LatentVector{a, b, std::sqrt(1.0 - a * a - b * b)}},
          {{"med", LatentVector{1, 0, 0}, r.w_med}, {"cub", LatentVector{0, 1, 0}, r.w_cub}});
      const double via_set = wms_score(es).wms;

      for (double got : {direct, via_set}) {
        worst = std::max(worst, std::abs(got - r.wms));
        t.expect(std::abs(got - r.wms) <= 5e-5, where);
      }
    }
  };
  run_table("linear", tables::kLinear, std::size(tables::kLinear));
  run_table("sli", tables::kSli, std::size(tables::kSli));
  t.note("max |WMS error| " + sci(worst));
}

// ---- 2 -------------------------------------------------------------------

void slerp_suite(Tally& t) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  double worst_norm = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t d = 2 + rng() % 63;
    const LatentVector z1 = oracle::random_unit(rng, d);
    const LatentVector z2 = oracle::random_unit(rng, d);
    t.expect(slerp_pair(z1, z2, 0.0).vector == z1, "t=0 endpoint");
    t.expect(slerp_pair(z1, z2, 1.0).vector == z2, "t=1 endpoint");
    for (int k = 0; k <= 10; ++k) {
      const double err = std::abs(slerp_pair(z1, z2, k / 10.0).vector.norm() - 1.0);
      worst_norm = std::max(worst_norm, err);
      t.expect(err <= 1e-9, "unit norm");
    }
  }
  t.note("max |norm - 1| " + sci(worst_norm));

  // Nearly parallel inputs take the lerp branch exactly.
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 2 + rng() % 15;
    const LatentVector z1 = oracle::random_unit(rng, d);
    std::vector<double> nudged(z1.values().begin(), z1.values().end());
    nudged[trial % d] += 1e-10;
    const LatentVector z2(nudged);
    const double tt = (trial % 9 + 1) / 10.0;
    const SlerpResult r = slerp_pair(z1, z2, tt);
    bool same = r.omega < kDefaultEpsOmega;
    for (std::size_t i = 0; i < d; ++i) {
      same = same && r.vector[i] == (1.0 - tt) * z1[i] + tt * z2[i];
    }
    t.expect(same, "lerp fallback");
  }

  for (int trial = 0; trial < 100; ++trial) {
    const LatentVector z = oracle::random_unit(rng, 2 + rng() % 15);
    std::vector<double> neg(z.values().begin(), z.values().end());
    for (double& x : neg) x = -3.0 * x;
    t.expect_error(ErrorKind::kAntipodalVectors, "antipodal pair",
                   [&] { slerp_pair(z, LatentVector(neg), 0.5); });
  }

  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t d = 2 + rng() % 15;
    const auto set = normalize_weights(WeightedStyleSet::from_pairs(
        {{oracle::random_unit(rng, d), u(rng)}, {oracle::random_unit(rng, d), u(rng)}}));
    const auto& en = set.entries();
    const bool swap = en[1].weight > en[0].weight;
    const StyleEntry& first = swap ? en[1] : en[0];
    const StyleEntry& second = swap ? en[0] : en[1];
    const double tt = second.weight / (first.weight + second.weight);
    t.expect(sli_blend(set).vector == slerp_pair(first.vector, second.vector, tt).vector,
             "two-style recursion");
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.expect(secs < 5.0, "runtime " + std::to_string(secs) + " s");
  t.note("runtime " + std::to_string(secs).substr(0, 5) + " s");
}

// ---- 3 -------------------------------------------------------------------

void geodesic(Tally& t) {
  for (int i = 1; i <= 10000; ++i) {
    const double w = M_PI * i / 10000.0;
    t.expect(2.0 * std::sin(w / 2.0) <= w, "grid chord <= arc");
    // The same angle through the library, from vectors at that angle.
    const ChordArc ca = chord_and_arc(LatentVector{1, 0}, LatentVector{std::cos(w), std::sin(w)});
    t.expect(ca.chord <= ca.arc, "vector chord <= arc");
  }
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  double largest = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t d = 2 + rng() % 31;
    const LatentVector a = oracle::random_unit(rng, d);
    const LatentVector b = oracle::random_unit(rng, d);
    const ChordArc ca = chord_and_arc(a, b);
    t.expect(ca.chord <= ca.arc, "random chord <= arc");
    const auto set = normalize_weights(WeightedStyleSet::from_pairs({{a, u(rng)}, {b, u(rng)}}));
    const double n = linear_blend(set).vector.norm();
    largest = std::max(largest, n);
    t.expect(n < 1.0, "linear blend norm < 1");
  }
  t.note("largest linear norm " + std::to_string(largest));
}

// ---- 4 -------------------------------------------------------------------

void attention_suite(Tally& t) {
  std::mt19937_64 rng(4);
  double worst_sum = 0.0;
  double worst_shift = 0.0;
  std::normal_distribution<double> shift(0.0, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng() % 5;
    const std::size_t nq = 1 + rng() % 4;
    const std::size_t nk = 2 + rng() % 6;
    const Matrix q = oracle::random_matrix(rng, nq, d, 3.0);
    const Matrix k = oracle::random_matrix(rng, nk, d, 3.0);
    const Matrix v = oracle::random_matrix(rng, nk, 2);
    const auto a = attention({q, k, v});
    worst_sum = std::max(worst_sum, worst_row_sum_error(a.weights));

    // Q' = [s Q, c], K' = [K, 1] with s = sqrt((d+1)/d) adds c / sqrt(d+1)
    // to every logit.
    const double s = std::sqrt(static_cast<double>(d + 1) / d);
    const double c = shift(rng);
    Matrix q2(nq, d + 1);
    Matrix k2(nk, d + 1);
    for (std::size_t i = 0; i < nq; ++i) {
      for (std::size_t j = 0; j < d; ++j) q2(i, j) = s * q(i, j);
      q2(i, d) = c;
    }
    for (std::size_t i = 0; i < nk; ++i) {
      for (std::size_t j = 0; j < d; ++j) k2(i, j) = k(i, j);
      k2(i, d) = 1.0;
    }
    const auto b = attention({q2, k2, v});
    for (std::size_t i = 0; i < a.weights.values().size(); ++i) {
      worst_shift = std::max(worst_shift, std::abs(a.weights.values()[i] - b.weights.values()[i]));
    }

    const Matrix rk = oracle::random_matrix(rng, 1 + rng() % 4, d, 3.0);
    const auto shared = reference_attention(q, rk, k, Matrix(rk.rows(), 2), v, {0.7, 0.6});
    worst_sum = std::max(worst_sum, worst_row_sum_error(shared.weights));
  }
  t.expect(worst_sum <= 1e-9, "row sums");
  t.expect(worst_shift <= 1e-9, "shift invariance");

  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng() % 4;
    const Matrix q = positive_matrix(rng, 3, d);
    const Matrix rk = positive_matrix(rng, 1 + rng() % 4, d);
    const Matrix sk = oracle::random_matrix(rng, 1 + rng() % 4, d);
    const Matrix rv(rk.rows(), 2);
    const Matrix sv(sk.rows(), 2);
    const auto mass = [&](double mu, double sigma) {
      return reference_attention(q, rk, sk, rv, sv, {mu, sigma}).ref_mass;
    };
    t.expect(mass(0.0, 0.5) < mass(0.0, 1.0) && mass(0.0, 1.0) < mass(0.0, 2.0),
             "ref_mass increasing in sigma");
    t.expect(mass(-1.0, 1.0) < mass(0.0, 1.0) && mass(0.0, 1.0) < mass(std::log(2.0), 1.0),
             "ref_mass increasing in mu");
  }

  std::uniform_real_distribution<double> w(0.01, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng() % 4;
    const Matrix q = positive_matrix(rng, 1 + rng() % 4, d);
    const Matrix k = positive_matrix(rng, 1 + rng() % 4, d);
    const Matrix v = oracle::random_matrix(rng, k.rows(), 2);
    std::vector<StyleBlock> blocks;
    for (std::size_t i = 0, n = 2 + rng() % 4; i < n; ++i) blocks.push_back({k, v, w(rng)});
    const auto r = lambda_rescaled_attention(q, blocks);
    worst_sum = std::max(worst_sum, worst_row_sum_error(r.weights));
    bool ordered = true;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      for (std::size_t j = 0; j < blocks.size(); ++j) {
        if (blocks[i].weight > blocks[j].weight) ordered &= r.block_mass[i] > r.block_mass[j];
      }
    }
    t.expect(ordered, "block mass follows weights");
  }
  t.expect(worst_sum <= 1e-9, "row sums (lambda)");

  const Matrix one = Matrix::from_rows({{1}});
  const double two_thirds = reference_attention(Matrix::from_rows({{0}}), one, one, one, one,
                                                {std::log(2.0), 1.0})
                                .ref_mass;
  t.expect(std::abs(two_thirds - 2.0 / 3.0) <= 1e-6, "ln 2 shift gives 2/3");
  const std::vector<StyleBlock> pair{{one, one, 1.0}, {one, one, 3.0}};
  const auto lam = lambda_rescaled_attention(one, pair);
  t.expect(std::abs(lam.block_mass[0] - 0.37754) <= 1e-6, "lambda mass 0.37754");
  t.expect(std::abs(lam.block_mass[1] - 0.62246) <= 1e-6, "lambda mass 0.62246");
  t.note("max row-sum error " + sci(worst_sum) + ", max shift diff " + sci(worst_shift));
}

// ---- 5 -------------------------------------------------------------------

FeatureMap random_map(std::mt19937_64& rng, std::size_t c, std::size_t n) {
  std::normal_distribution<double> shift(0.0, 4.0);
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  FeatureMap f(c, n);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double m = shift(rng);
    const double s = scale(rng);
    const auto z = oracle::gaussian(rng, n);
    for (std::size_t i = 0; i < n; ++i) f(ch, i) = m + s * z[i];
  }
  return f;
}

void adain_suite(Tally& t) {
  std::mt19937_64 rng(5);
  double worst_mean = 0.0;
  double worst_std = 0.0;
  double worst_idem = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = 1 + rng() % 8;
    const FeatureMap g = random_map(rng, c, 4 + rng() % 96);
    const FeatureMap s = random_map(rng, c, 4 + rng() % 96);
    const FeatureMap out = adain(g, s);
    const ChannelStats got = channel_stats(out);
    const ChannelStats want = channel_stats(s);
    for (std::size_t ch = 0; ch < c; ++ch) {
      worst_mean = std::max(worst_mean, std::abs(got.mean[ch] - want.mean[ch]));
      worst_std = std::max(worst_std, std::abs(got.std[ch] - want.std[ch]) / want.std[ch]);
    }
    const FeatureMap twice = adain(out, s);
    for (std::size_t i = 0; i < out.values().size(); ++i) {
      worst_idem = std::max(worst_idem, std::abs(twice.values()[i] - out.values()[i]));
    }
  }
  t.expect(worst_mean <= 1e-9, "mean transfer");
  t.expect(worst_std <= 1e-6, "std transfer");
  t.expect(worst_idem <= 1e-9, "idempotence");
  t.note("mean " + sci(worst_mean) + ", rel std " + sci(worst_std) + ", idem " +
         sci(worst_idem));
}

// ---- 6 -------------------------------------------------------------------

void score_drop(Tally& t) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double tightest = INFINITY;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 2 + rng() % 15;
    const std::size_t k = 1 + rng() % 6;
    std::vector<LatentVector> gen;
    for (std::size_t i = 0, n = 1 + rng() % 10; i < n; ++i) {
      gen.emplace_back(oracle::gaussian(rng, d));
    }
    std::vector<ReferenceStyle> refs;
    for (std::size_t i = 0; i < k; ++i) {
      refs.push_back({"s" + std::to_string(i), LatentVector(oracle::gaussian(rng, d)),
                      u(rng) + 1e-3});
    }
    const EmbeddingSet es = EmbeddingSet(gen, refs).normalized();
    const ScoreDropBound b = score_drop_bound(es);

    // Independent restatement: long-double cosines and weights.
    long double wsum = 0.0L;
    for (const auto& r : es.references()) wsum += r.weight;
    long double wms = 0.0L;
    long double best = -2.0L;
    for (const auto& r : es.references()) {
      long double ms = 0.0L;
      const auto rv = oracle::to_std(r.embedding.values());
      for (const auto& g : es.generated()) {
        const auto gv = oracle::to_std(g.values());
        ms += oracle::dot(gv, rv) / (oracle::norm(gv) * oracle::norm(rv));
      }
      ms /= es.generated().size();
      wms += r.weight / wsum * ms;
      best = std::max(best, ms);
    }
    t.expect(b.holds && b.wms <= b.max_ms + 1e-12, "library bound");
    t.expect(wms <= best + 1e-15L, "oracle bound");
    t.expect(std::abs(b.wms - static_cast<double>(wms)) <= 1e-12, "wms agrees with oracle");
    tightest = std::min(tightest, b.max_ms - b.wms);
  }
  t.note("smallest margin " + sci(tightest));
}

// ---- 7 -------------------------------------------------------------------

std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i);
  return out;
}

class Recorder final : public Paraphraser {
 public:
  std::string paraphrase(const ParaphraseRequest& request) override {
    seen.push_back(request.text);
    return "short " + std::to_string(seen.size());
  }
  std::vector<std::string> seen;
};

// Runs the command line with the child processes' stderr discarded so the
// report stays one line per criterion.
int quiet_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lbk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  std::fflush(stderr);
  const int saved = ::dup(2);
  const int null = ::open("/dev/null", O_WRONLY);
  ::dup2(null, 2);
  ::close(null);
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  ::dup2(saved, 2);
  ::close(saved);
  return code;
}

void fusion_suite(Tally& t) {
  const FusionConfig cfg;
  {
    Recorder p;
    fuse({{Modality::kImage, words(10)}}, cfg, p);
    t.expect(p.seen.empty(), "10 words are kept");
    fuse({{Modality::kImage, words(11)}}, cfg, p);
    t.expect(p.seen.size() == 1 && cfg.verbosity_threshold == 10, "11 words are paraphrased");
  }
  {
    Recorder p;
    const std::vector<ModalityDescription> ds{{Modality::kText, words(3)},
                                              {Modality::kImage, words(12)},
                                              {Modality::kWeather, "rain, 1.0 degrees, wind 2.0 m/s"},
                                              {Modality::kAudio, words(20)},
                                              {Modality::kMusic, "calm and peaceful"}};
    const FusionResult r = fuse(ds, cfg, p);
    t.expect(r.prompt == words(3) + ", short 1, rain, 1.0 degrees, wind 2.0 m/s, short 2, "
                                    "calm and peaceful",
             "order preserved");
    t.expect(p.seen == std::vector<std::string>{words(12), words(20)}, "provider call order");
  }

  const QueryCatalog cat = load_query_catalog(kData / "music_queries.json");
  t.expect(cat.size() == 24, "catalog size");
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const LatentVector a(oracle::gaussian(rng, cat.dim()));
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t i = 0; i < cat.size(); ++i) {
      const double s = cosine_similarity(a, cat.queries()[i].embedding);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    t.expect(best_music_query(a, cat).index == best, "argmax");
  }

  scratch::Dir dir;
  const std::string inputs =
      dir.write("in.json", R"({"inputs": [{"modality": "image", "text": ")" + words(12) +
                               R"("}]})")
          .string();
  ::unsetenv("LBK_PROVIDER");
  t.expect(quiet_cli({"fuse", "--inputs", inputs}) == cli::kExitProviderUnavailable,
           "no provider exits 4");
  t.expect(quiet_cli({"fuse", "--inputs", inputs, "--provider",
                      "command:" + (kFixtures / "providers/fail.sh").string()}) ==
               cli::kExitProviderFailure,
           "failing provider exits 5");
}

// ---- 8 -------------------------------------------------------------------

void schedule(Tally& t) {
  const DdimScheduleConfig cfg;
  const DdimSchedule s = build_schedule(cfg);
  t.expect(s.betas.size() == 50, "50 steps");
  t.expect(s.betas.front() == 0.00085, "betas[0]");
  t.expect(s.betas.back() == 0.012, "betas[49]");
  const long double r0 = std::sqrt(static_cast<long double>(cfg.beta_start));
  const long double r1 = std::sqrt(static_cast<long double>(cfg.beta_end));
  long double prod = 1.0L;
  double worst = 0.0;
  for (std::size_t i = 0; i < s.betas.size(); ++i) {
    if (i) t.expect(s.alpha_cumprod[i] < s.alpha_cumprod[i - 1], "strictly decreasing");
    const long double root = r0 + (r1 - r0) * static_cast<long double>(i) / 49.0L;
    prod *= 1.0L - root * root;
    worst = std::max(worst, static_cast<double>(std::abs((s.alpha_cumprod[i] - prod) / prod)));
  }
  t.expect(worst < 1e-15, "product oracle");
  t.note("alpha_cumprod[49] " + std::to_string(s.alpha_cumprod[49]) + ", max rel err " +
         sci(worst));
}

// ---- 9 -------------------------------------------------------------------

// Frozen from the first run that satisfied the properties below.
constexpr double kGoldenInitial = 4.01684773599252;
constexpr double kGoldenFinal = 0.02818875681921934;

bool identical(const SandboxReport& a, const SandboxReport& b) {
  return a.initial_stat_distance == b.initial_stat_distance &&
         a.per_step_stat_distance == b.per_step_stat_distance &&
         a.per_step_ref_mass == b.per_step_ref_mass &&
         a.per_step_strength == b.per_step_strength && a.final_ref_mass == b.final_ref_mass &&
         a.final_stat_distance == b.final_stat_distance;
}

void sandbox(Tally& t) {
  SandboxConfig cfg;
  const SandboxReport base = run_sandbox(cfg);
  t.expect(identical(base, run_sandbox(cfg)), "repeat run");
  for (std::size_t threads : {2u, 3u, 4u, 8u}) {
    cfg.worker_threads = threads;
    t.expect(identical(base, run_sandbox(cfg)), std::to_string(threads) + " threads");
  }
  t.expect(base.final_stat_distance < 0.5 * base.initial_stat_distance, "halved");
  t.expect(std::abs(base.initial_stat_distance / kGoldenInitial - 1.0) <= 1e-12, "golden initial");
  t.expect(std::abs(base.final_stat_distance / kGoldenFinal - 1.0) <= 1e-9, "golden final");

  double previous = INFINITY;
  for (double g : {5.0, 10.0, 15.0, 20.0, 25.0, 30.0}) {
    SandboxConfig c;
    c.guidance_scale = g;
    t.expect(c.seed == 7, "seed 7");
    const double f = run_sandbox(c).final_stat_distance;
    t.expect(f <= previous, "guidance sweep monotone at " + std::to_string(g));
    previous = f;
  }
  t.note("initial " + std::to_string(base.initial_stat_distance) + " -> final " +
         std::to_string(base.final_stat_distance));
}

// ---- 10 ------------------------------------------------------------------

std::string make_npy(std::string dict, std::string_view payload) {
  const std::size_t total = 10 + dict.size() + 1;
  dict.append((64 - total % 64) % 64, ' ');
  dict += '\n';
  std::string out("\x93NUMPY\x01\x00", 8);
  out += static_cast<char>(dict.size() & 0xff);
  out += static_cast<char>(dict.size() >> 8);
  return out + dict + std::string(payload);
}

void npy_suite(Tally& t) {
  std::mt19937_64 rng(10);
  scratch::Dir dir;
  for (int trial = 0; trial < 1000; ++trial) {
    NpyArray a;
    a.shape = rng() % 2 ? std::vector<std::size_t>{1 + rng() % 64}
                        : std::vector<std::size_t>{1 + rng() % 16, 1 + rng() % 16};
    std::size_t n = 1;
    for (auto d : a.shape) n *= d;
    a.data = oracle::gaussian(rng, n, 1e3);
    const NpyDtype dtype = rng() % 2 ? NpyDtype::kF4 : NpyDtype::kF8;
    if (dtype == NpyDtype::kF4) {
      for (double& x : a.data) x = static_cast<float>(x);
    }
    const fs::path p = dir / ("a" + std::to_string(trial % 8) + ".npy");
    write_npy(p, a, dtype);
    const NpyArray b = read_npy(p);
    t.expect(b.shape == a.shape && b.data == a.data && b.dtype == dtype, "round trip");
  }

  const std::string pay(8, '\0');
  const std::string good = make_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (1,), }", pay);
  t.expect(parse_npy(good).shape == std::vector<std::size_t>{1}, "hand-built header");
  std::string magic = good;
  magic[0] = 'X';
  t.expect_error(ErrorKind::kBadMagic, "magic", [&] { parse_npy(magic); });
  std::string version = good;
  version[6] = 4;
  t.expect_error(ErrorKind::kUnsupportedVersion, "version", [&] { parse_npy(version); });
  t.expect_error(ErrorKind::kTruncatedPayload, "short header",
                 [&] { parse_npy(good.substr(0, 30)); });
  t.expect_error(ErrorKind::kTruncatedPayload, "short payload",
                 [&] { parse_npy(good.substr(0, good.size() - 1)); });
  t.expect_error(ErrorKind::kMalformedHeader, "missing key", [&] {
    parse_npy(make_npy("{'descr': '<f8', 'shape': (1,), }", pay));
  });
  t.expect_error(ErrorKind::kMalformedHeader, "unterminated dict", [&] {
    parse_npy(make_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (1,", pay));
  });
  t.expect_error(ErrorKind::kUnsupportedDtype, "dtype", [&] {
    parse_npy(make_npy("{'descr': '<i8', 'fortran_order': False, 'shape': (1,), }", pay));
  });
  const fs::path npy = kFixtures / "npy";
  t.expect_error(ErrorKind::kUnsupportedOrder, "fortran file",
                 [&] { read_npy(npy / "fortran.npy"); });
  t.expect_error(ErrorKind::kUnsupportedDtype, "big-endian file",
                 [&] { read_npy(npy / "big_endian.npy"); });
  t.expect_error(ErrorKind::kUnsupportedVersion, "v2 file", [&] { read_npy(npy / "v2.npy"); });
  t.expect_error(ErrorKind::kInvalidShape, "3-D file", [&] { read_npy(npy / "cube.npy"); });
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Tally&)>>> criteria{
      {"table arithmetic", table_arithmetic},
      {"slerp properties", slerp_suite},
      {"chord vs arc, linear shrinkage", geodesic},
      {"attention", attention_suite},
      {"adain statistics", adain_suite},
      {"score-drop bound", score_drop},
      {"fusion", fusion_suite},
      {"schedule", schedule},
      {"sandbox", sandbox},
      {"npy io", npy_suite},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Tally t;
    try {
      criteria[i].second(t);
    } catch (const std::exception& e) {
      t.expect(false, std::string("unexpected exception: ") + e.what());
    }
    failures += !t.ok();
    std::cout << "criterion " << (i + 1) << ": " << (t.ok() ? "PASS" : "FAIL") << "  "
              << criteria[i].first << " (" << t.summary() << ")" << std::endl;
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
