#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lbk/attention.hpp"

namespace lbk {

enum class BetaSchedule { kScaledLinear, kLinear };

struct DdimScheduleConfig {
  double beta_start = 0.00085;
  double beta_end = 0.012;
  BetaSchedule beta_schedule = BetaSchedule::kScaledLinear;
  std::size_t steps = 50;
  bool clip_sample = false;  // carried for completeness; the toy loop never clips
  bool set_alpha_to_one = false;

  /// Throws InvalidSpec unless 0 < beta_start < beta_end < 1, steps >= 1.
  void validate() const;
};

struct DdimSchedule {
  std::vector<double> betas;
  std::vector<double> alphas;          // 1 - beta
  std::vector<double> alpha_cumprod;   // running product of alphas
  double final_alpha_cumprod = 1.0;    // 1 or alpha_cumprod[0]
};

/// Betas on the configured grid with both endpoints set exactly to the
/// configured values. A single step uses beta_start.
DdimSchedule build_schedule(const DdimScheduleConfig& cfg);

struct SandboxConfig {
  double guidance_scale = 10.0;
  std::uint64_t seed = 7;
  std::size_t n_images = 4;  // image 0 is the reference
  std::size_t channels = 8;
  std::size_t positions = 64;
  DdimScheduleConfig schedule;
  RescaleParams rescale{0.69314718055994530942, 1.0};
  std::size_t worker_threads = 1;

  void validate() const;
};

/// Guidance value at which the first step's update strength reaches one.
inline constexpr double kGuidanceCeiling = 30.0;

struct SandboxReport {
  double initial_stat_distance = 0.0;
  std::vector<double> per_step_stat_distance;
  std::vector<double> per_step_ref_mass;
  std::vector<double> per_step_strength;
  double final_ref_mass = 0.0;
  double final_stat_distance = 0.0;
};

/// Toy style-aligned denoising loop.
///
/// A frozen reference map and n_images - 1 generated maps are drawn from the
/// seed. Each step applies a fixed orthogonal pseudo-denoiser that mixes
/// positions, lets every generated map attend to the reference through
/// shared_attention, and moves it toward the attention output with a
/// strength proportional to guidance * (1 - alpha_cumprod[t]). The recorded
/// distance is the mean L2 gap between [mean; std] channel statistics of each
/// generated map and the reference. Results do not depend on worker_threads.
SandboxReport run_sandbox(const SandboxConfig& cfg);

}  // namespace lbk
