#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "renormesh/errors.hpp"
#include "renormesh/integrator.hpp"
#include "renormesh/models.hpp"
#include "renormesh/renorm.hpp"
#include "renormesh/spectral.hpp"

namespace renormesh {

/// Case I co-evolves a reduced model with known coefficients; Case II only
/// evolves the full system and builds B from its resolved modes.
enum class AlgorithmCase { I, II };

struct ExperimentConfig {
  std::string name = "run";
  double nu = 0.0;
  int n_start = 256;
  int n_final = 256;
  double tol = 1e-16;
  ModelKind model = ModelKind::tmodel();
  AlgorithmCase algorithm_case = AlgorithmCase::I;
  /// |F| / |F u G|.
  double reduced_fraction = 0.5;
  /// |I| = padding_factor * |F u G|.
  int padding_factor = 1;
  IntegratorSettings integrator;
  double t_end = 1.1;
  /// Steps between trace rows. The |detB| trigger is tested on every step.
  int record_stride = 1;
  /// Measure the t-model clock from the switchover instant instead of t = 0.
  bool restart_clock_at_switch = false;
  /// Steps the Case II switchover may be postponed while B is singular.
  int max_switch_delay = 50;
  long max_steps = 50'000'000;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  int resolved_size(int n_total) const;
};

struct TraceRecord {
  double t = 0.0;
  int n_current = 0;
  std::complex<double> eig1{};
  std::complex<double> eig2{};
  double detB = 0.0;
  int digits1 = 0;
  int digits2 = 0;
  double E1_full = 0.0;
  double E2_full = 0.0;
  double E1_reduced = 0.0;
  double E2_reduced = 0.0;
  double dE1_full = 0.0;
  double dE1_reduced = 0.0;
  bool refinement_event = false;
  bool switchover_event = false;
  /// |detB| below the singularity threshold; eigenvalues are not meaningful.
  bool b_singular = true;
  /// No renormalization data (rows after switchover).
  bool reduced_only = false;
};

enum class StopReason { reached_end, exhausted, underflow };

struct RunResult {
  std::vector<TraceRecord> trace;
  StopReason stop = StopReason::reached_end;
  double t_final = 0.0;
  long steps = 0;
  double wall_seconds = 0.0;
  /// Instants at which N was doubled.
  std::vector<double> refinement_times;
  /// First instant with |detB| >= TOL at N = n_final.
  std::optional<double> exhaustion_time;
  /// Full-system quantities over F at the exhaustion instant.
  std::optional<Quantities> exhaustion_quantities;
  std::optional<double> switchover_time;
  std::optional<CoefficientVector> identified;
  /// Active field at the end of the run: the full system before switchover,
  /// the reduced model after.
  SpectralField final_field;
  /// Full-system field at exhaustion (or at the end if never exhausted).
  SpectralField terminal_full_field;
};

/// Algorithm 1: co-evolve full (N modes) and reduced (N * fraction modes)
/// systems at fixed N = n_start and record the renormalization data.
RunResult run_case1_detect(const ExperimentConfig& config);

/// Algorithm 4: evolve only the full system; B is built from its resolved
/// modes and the agreement digits are reported as 16.
RunResult run_case2_detect(const ExperimentConfig& config);

/// Dispatches on config.algorithm_case.
RunResult run_detect(const ExperimentConfig& config);

/// Algorithms 2 and 5: double N whenever |detB| >= TOL until n_final; stop
/// when the trigger fires at n_final.
RunResult run_refine(const ExperimentConfig& config);

/// Algorithms 3 and 6: refine to exhaustion, then continue with the reduced
/// model on the lower half of the final mode set. Case II identifies the
/// coefficients once at the switchover instant.
RunResult run_follow(const ExperimentConfig& config);

/// Solves the moment-matching system sum_j B[i][j] a_j = e_i for the
/// reduced-model coefficients. Throws NumericalError when B is flagged
/// singular.
CoefficientVector solve_coefficients(const Matrix2& B, std::array<double, 2> e);

struct CalibrationResult {
  double tol = 0.0;
  int digits = 0;
  int iterations = 0;
};

/// Thrown when TOL would drop below 1e-16 without reaching the target.
class CalibrationError : public NumericalError {
 public:
  CalibrationError(const std::string& what, int best)
      : NumericalError(what), best_digits(best) {}
  int best_digits;
};

/// Algorithm 2 steps 1-3: compare quantities of a refining run (n_start ->
/// n_final) and a fixed run (n_final) at their exhaustion instants; reduce
/// TOL by decades until they agree to target_digits.
CalibrationResult calibrate_tol(const ExperimentConfig& config, int target_digits);

struct TurningPointReport {
  double t_turn = 0.0;
  double eig_at_turn = 0.0;
  /// Crossing instants between consecutive resolutions, when analyzed as a
  /// sweep.
  std::vector<double> crossing_times;
  std::vector<int> resolutions;
};

/// Time of the steepest growth of the second eigenvalue: the maximum of the
/// centered finite-difference rate of its 5-record moving average. Flagged
/// records are skipped. Empty when there is no growth phase.
std::optional<TurningPointReport> detect_turning_point(std::span<const TraceRecord> trace);

/// First instant in [t_lo, t_hi] where the second eigenvalue of `high` rises
/// through that of `low`.
std::optional<double> crossing_time(std::span<const TraceRecord> low,
                                    std::span<const TraceRecord> high, double t_lo,
                                    double t_hi);

}  // namespace renormesh
