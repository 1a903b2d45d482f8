#include "lbk/sandbox.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "lbk/error.hpp"

namespace lbk {
namespace {

// Bit-portable draws: std::*_distribution output is implementation-defined,
// so uniforms and normals are built directly from the engine's 64-bit words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // In [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Reflection I - 2 v v^T with v orthogonal to the ones vector, so per-column
// means and stds of the token matrix survive it unchanged.
struct Reflection {
  std::vector<double> v;
};

Reflection draw_reflection(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double sq = 0.0;
  for (double& x : v) {
    x -= mean;
    sq += x * x;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return {std::move(v)};
}

void apply_reflection(const Reflection& h, Matrix& tokens) {
  for (std::size_t c = 0; c < tokens.cols(); ++c) {
    double proj = 0.0;
    for (std::size_t r = 0; r < tokens.rows(); ++r) proj += h.v[r] * tokens(r, c);
    for (std::size_t r = 0; r < tokens.rows(); ++r) {
      tokens(r, c) -= 2.0 * proj * h.v[r];
    }
  }
}

double stat_distance(const ChannelStats& a, const ChannelStats& b) {
  double sq = 0.0;
  for (std::size_t c = 0; c < a.mean.size(); ++c) {
    const double dm = a.mean[c] - b.mean[c];
    const double ds = a.std[c] - b.std[c];
    sq += dm * dm + ds * ds;
  }
  return std::sqrt(sq);
}

struct ImageStep {
  double ref_mass = 0.0;
  double distance = 0.0;
};

// One denoising step for one generated image, in place.
ImageStep step_image(Matrix& x, const std::vector<Reflection>& denoiser,
                     const AttentionInputs& ref, const ChannelStats& ref_stats,
                     double strength, const RescaleParams& rescale) {
  for (const Reflection& h : denoiser) apply_reflection(h, x);

  const SharedAttentionOutput att =
      shared_attention({x, x, x}, ref, rescale);
  const ChannelStats xs = column_stats(x);

  Matrix blended(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      blended(r, c) = (1.0 - strength) * x(r, c) + strength * att.updated(r, c);
    }
  }

  // Attention decides how far the statistics travel toward the reference;
  // the blended tokens supply the spatial pattern.
  const double pull = strength * att.ref_mass;
  const ChannelStats bs = column_stats(blended);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double mean = xs.mean[c] + pull * (ref_stats.mean[c] - xs.mean[c]);
    const double sd = xs.std[c] + pull * (ref_stats.std[c] - xs.std[c]);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      x(r, c) = sd * (blended(r, c) - bs.mean[c]) / bs.std[c] + mean;
    }
  }
  return {att.ref_mass, stat_distance(column_stats(x), ref_stats)};
}

template <typename Fn>
void for_each_image(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += threads) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

void DdimScheduleConfig::validate() const {
  if (!(beta_start > 0.0 && beta_start < beta_end && beta_end < 1.0)) {
    throw Error(ErrorKind::kInvalidSpec,
                "schedule needs 0 < beta_start < beta_end < 1");
  }
  if (steps < 1) {
    throw Error(ErrorKind::kInvalidSpec, "schedule needs at least one step");
  }
}

DdimSchedule build_schedule(const DdimScheduleConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.steps;
  DdimSchedule s;
  s.betas.resize(n);
  if (n == 1) {
    s.betas[0] = cfg.beta_start;
  } else {
    const double last = static_cast<double>(n - 1);
    if (cfg.beta_schedule == BetaSchedule::kScaledLinear) {
      const double r0 = std::sqrt(cfg.beta_start);
      const double r1 = std::sqrt(cfg.beta_end);
      for (std::size_t t = 0; t < n; ++t) {
        const double r = r0 + (static_cast<double>(t) / last) * (r1 - r0);
        s.betas[t] = r * r;
      }
    } else {
      for (std::size_t t = 0; t < n; ++t) {
        s.betas[t] = cfg.beta_start + (static_cast<double>(t) / last) *
                                          (cfg.beta_end - cfg.beta_start);
      }
    }
    // sqrt-then-square is not exact; keep the configured endpoints.
    s.betas.front() = cfg.beta_start;
    s.betas.back() = cfg.beta_end;
  }

  s.alphas.resize(n);
  s.alpha_cumprod.resize(n);
  double running = 1.0;
  for (std::size_t t = 0; t < n; ++t) {
    s.alphas[t] = 1.0 - s.betas[t];
    running *= s.alphas[t];
    s.alpha_cumprod[t] = running;
  }
  s.final_alpha_cumprod = cfg.set_alpha_to_one ? 1.0 : s.alpha_cumprod[0];
  return s;
}

void SandboxConfig::validate() const {
  schedule.validate();
  if (!(guidance_scale > 0.0) || !std::isfinite(guidance_scale)) {
    throw Error(ErrorKind::kInvalidSpec, "guidance_scale must be positive");
  }
  if (n_images < 2) {
    throw Error(ErrorKind::kInvalidSpec,
                "n_images must be >= 2 (one reference plus generated maps)");
  }
  if (channels < 1 || positions < 2) {
    throw Error(ErrorKind::kInvalidSpec,
                "feature maps need >= 1 channel and >= 2 positions");
  }
  if (!std::isfinite(rescale.mu) || !(rescale.sigma > 0.0) ||
      !std::isfinite(rescale.sigma)) {
    throw Error(ErrorKind::kInvalidSpec, "rescale needs finite mu, sigma > 0");
  }
  if (worker_threads < 1) {
    throw Error(ErrorKind::kInvalidSpec, "worker_threads must be >= 1");
  }
}

SandboxReport run_sandbox(const SandboxConfig& cfg) {
  cfg.validate();
  const DdimSchedule schedule = build_schedule(cfg.schedule);
  const std::size_t C = cfg.channels;
  const std::size_t N = cfg.positions;
  Rng rng(cfg.seed);

  std::vector<double> ref_mean(C), ref_std(C);
  for (double& m : ref_mean) m = rng.uniform(-1.5, 1.5);
  for (double& s : ref_std) s = rng.uniform(0.5, 2.0);
  FeatureMap ref_map(C, N);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t n = 0; n < N; ++n) {
      ref_map(c, n) = ref_mean[c] + ref_std[c] * rng.normal();
    }
  }
  const Matrix ref_tokens = to_tokens(ref_map);
  const AttentionInputs ref{ref_tokens, ref_tokens, ref_tokens};
  const ChannelStats ref_stats = column_stats(ref_tokens);

  std::vector<Matrix> images;
  for (std::size_t i = 1; i < cfg.n_images; ++i) {
    FeatureMap g(C, N);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t n = 0; n < N; ++n) g(c, n) = rng.normal();
    }
    images.push_back(to_tokens(g));
  }

  std::vector<Reflection> denoiser;
  for (int k = 0; k < 3; ++k) denoiser.push_back(draw_reflection(rng, N));

  SandboxReport report;
  {
    double total = 0.0;
    for (const Matrix& x : images) {
      total += stat_distance(column_stats(x), ref_stats);
    }
    report.initial_stat_distance = total / static_cast<double>(images.size());
  }

  const std::size_t steps = cfg.schedule.steps;
  const double noisiest = 1.0 - schedule.alpha_cumprod[steps - 1];
  std::vector<ImageStep> results(images.size());
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = steps - 1 - s;
    const double strength =
        std::min(1.0, cfg.guidance_scale * (1.0 - schedule.alpha_cumprod[t]) /
                          (kGuidanceCeiling * noisiest));

    for_each_image(images.size(), cfg.worker_threads, [&](std::size_t i) {
      results[i] = step_image(images[i], denoiser, ref, ref_stats, strength,
                              cfg.rescale);
    });

    double mass = 0.0;
    double dist = 0.0;
    for (const ImageStep& r : results) {
      mass += r.ref_mass;
      dist += r.distance;
    }
    const double count = static_cast<double>(images.size());
    report.per_step_strength.push_back(strength);
    report.per_step_ref_mass.push_back(mass / count);
    report.per_step_stat_distance.push_back(dist / count);
  }
  report.final_ref_mass = report.per_step_ref_mass.back();
  report.final_stat_distance = report.per_step_stat_distance.back();
  return report;
}

}  // namespace lbk
