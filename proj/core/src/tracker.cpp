#include "renormesh/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "renormesh/errors.hpp"

namespace renormesh {

namespace {

constexpr CoefficientVector kFullCoefficients{1.0, 0.0};

enum class Mode { detect, refine, follow };

bool all_finite(std::span<const Complex> y) {
  return std::all_of(y.begin(), y.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

RhsFunction make_rhs(int size, ModePartition partition, CoefficientVector a,
                     double nu, SystemRole role, std::function<double(double)> clock) {
  return [=](double t, std::span<const Complex> y, std::span<Complex> dydt) {
    if (!all_finite(y)) {
      std::fill(dydt.begin(), dydt.end(),
                Complex{std::numeric_limits<double>::quiet_NaN(), 0.0});
      return;
    }
    try {
      const SpectralField u =
          SpectralField::from_modes(size, std::vector<Complex>(y.begin(), y.end()), t);
      const std::vector<Complex> d = rhs(u, partition, a, nu, clock(t), role);
      std::copy(d.begin(), d.end(), dydt.begin());
    } catch (const std::invalid_argument&) {
      std::fill(dydt.begin(), dydt.end(),
                Complex{std::numeric_limits<double>::quiet_NaN(), 0.0});
    }
  };
}

std::vector<Complex> to_state(const SpectralField& f) {
  return {f.modes().begin(), f.modes().end()};
}

SpectralField to_field(const std::vector<Complex>& y, double t) {
  return SpectralField::from_modes(static_cast<int>(y.size()), y, t);
}

// One run of Algorithms 1-6. Owns the time march and all mutable state.
class Run {
 public:
  Run(const ExperimentConfig& config, Mode mode)
      : cfg_(config), mode_(mode), integrator_(config.integrator) {
    cfg_.validate();
    n_ = cfg_.n_start;
    full_ = to_state(field_from_sine(n_));
    if (cfg_.algorithm_case == AlgorithmCase::I) {
      reduced_ = to_state(field_from_sine(cfg_.resolved_size(n_)));
    }
    dt_next_ = cfg_.integrator.method == StepMethod::fixed_rk4 ? cfg_.integrator.dt_fixed
                                                               : cfg_.integrator.dt_initial;
  }

  RunResult execute() {
    const auto start = std::chrono::steady_clock::now();
    try {
      march();
    } catch (const StepUnderflow&) {
      result_.stop = StopReason::underflow;
      if (!switched_) record(false, false);
      else record_reduced_only(false);
    } catch (const std::invalid_argument& e) {
      throw NumericalError(std::string("non-finite solution: ") + e.what());
    }
    result_.t_final = t_;
    result_.steps = steps_;
    if (switched_) {
      result_.final_field = to_field(reduced_, t_);
    } else {
      result_.final_field = to_field(full_, t_);
      if (result_.terminal_full_field.size() == 0) {
        result_.terminal_full_field = result_.final_field;
      }
    }
    result_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(result_);
  }

 private:
  int resolved() const { return cfg_.resolved_size(n_); }
  ModePartition partition() const {
    return ModePartition(resolved(), n_, cfg_.padding_factor);
  }

  double model_clock(double t) const {
    if (switched_ && cfg_.restart_clock_at_switch) return t - t_switch_;
    return t;
  }

  // Renormalization data at the current state.
  RenormState renorm_state(CoefficientVector reduced_coeffs, QuantityRates* full_rates,
                           QuantityRates* reduced_rates, Quantities* qf,
                           Quantities* qr) const {
    const ModePartition p = partition();
    const ModeRange F = p.resolved();
    const SpectralField full = to_field(full_, t_);
    const double clock = model_clock(t_);
    const TermEvaluation ft = evaluate_terms(full, p, cfg_.nu, clock, SystemRole::full);
    const Matrix2 full_c = rate_contributions(ft, full, F);

    SpectralField reduced_field =
        cfg_.algorithm_case == AlgorithmCase::I ? to_field(reduced_, t_)
                                                : restrict_field(full, p.n_resolved());
    const TermEvaluation rt =
        evaluate_terms(reduced_field, p, cfg_.nu, clock, SystemRole::reduced);
    const Matrix2 reduced_c = rate_contributions(rt, reduced_field, F);

    RenormState s = build_matrices(full_c, reduced_c);
    s.time = t_;
    solve_M(s);
    *full_rates = weighted_rates(full_c, kFullCoefficients);
    *reduced_rates = weighted_rates(reduced_c, reduced_coeffs);
    *qf = quantities(full, F);
    *qr = quantities(reduced_field, F);
    if (cfg_.algorithm_case == AlgorithmCase::I) {
      s.digits = {digits_agreement(full_rates->dE1, reduced_rates->dE1),
                  digits_agreement(full_rates->dE2, reduced_rates->dE2)};
    } else {
      s.digits = {16, 16};
    }
    return s;
  }

  // Builds the trace row for the coupled phase, appends it when `keep` is set
  // and returns the renorm state.
  RenormState record(bool refine_event, bool switch_event, bool keep = true) {
    QuantityRates fr, rr;
    Quantities qf, qr;
    RenormState s = renorm_state(cfg_.model.coefficients(), &fr, &rr, &qf, &qr);

    TraceRecord row;
    row.t = t_;
    row.n_current = n_;
    EigenPair eig = s.eig;
    if (!s.b_singular) {
      // The type-i eigenvalue is the one nearest 1. Continuity matching would
      // follow the branches through the avoided crossing instead.
      eig = order_nearest_one(eig);
    }
    row.eig1 = eig.first;
    row.eig2 = eig.second;
    row.detB = s.detB;
    row.digits1 = s.digits[0];
    row.digits2 = s.digits[1];
    row.E1_full = qf.e1;
    row.E2_full = qf.e2;
    row.E1_reduced = qr.e1;
    row.E2_reduced = qr.e2;
    row.dE1_full = fr.dE1;
    row.dE1_reduced = cfg_.algorithm_case == AlgorithmCase::I ? rr.dE1 : fr.dE1;
    row.refinement_event = refine_event;
    row.switchover_event = switch_event;
    row.b_singular = s.b_singular;
    last_row_ = row;
    if (keep) result_.trace.push_back(row);
    return s;
  }

  void record_reduced_only(bool switch_event) {
    const SpectralField red = to_field(reduced_, t_);
    const Quantities q = quantities(red, red.range());
    TraceRecord row;
    row.t = t_;
    row.n_current = red.size();
    row.E1_reduced = q.e1;
    row.E2_reduced = q.e2;
    row.switchover_event = switch_event;
    row.reduced_only = true;
    row.b_singular = true;
    row.digits1 = row.digits2 = 0;
    result_.trace.push_back(row);
  }

  void refine() {
    const SpectralField full = spectral_interpolate(to_field(full_, t_), 2 * n_);
    full_ = to_state(full);
    if (cfg_.algorithm_case == AlgorithmCase::I) {
      reduced_ = to_state(spectral_interpolate(to_field(reduced_, t_), cfg_.resolved_size(2 * n_)));
    }
    n_ *= 2;
    result_.refinement_times.push_back(t_);
  }

  // Handles the |detB| trigger. Returns false when the march should stop.
  bool on_record(const RenormState& s) {
    if (mode_ == Mode::detect) return true;
    if (std::abs(s.detB) < cfg_.tol) return true;
    if (n_ < cfg_.n_final) {
      refine();
      record(true, false);
      return true;
    }
    if (!result_.exhaustion_time) {
      result_.exhaustion_time = t_;
      const SpectralField full = to_field(full_, t_);
      result_.exhaustion_quantities = quantities(full, partition().resolved());
      result_.terminal_full_field = full;
      result_.stop = StopReason::exhausted;
    }
    if (mode_ == Mode::refine) return false;
    return try_switch(s);
  }

  // Switches to the reduced model. Case II may postpone while B is singular.
  bool try_switch(const RenormState& s) {
    CoefficientVector coeffs = cfg_.model.coefficients();
    if (cfg_.algorithm_case == AlgorithmCase::II) {
      if (s.b_singular) {
        if (++switch_delays_ > cfg_.max_switch_delay) {
          throw NumericalError("coefficient identification: B stayed singular");
        }
        return true;
      }
      const QuantityRates e = weighted_rates(s.A, kFullCoefficients);
      coeffs = solve_coefficients(s.B, {e.dE1, e.dE2});
      result_.identified = coeffs;
      reduced_ = to_state(restrict_field(to_field(full_, t_), resolved()));
    }
    switched_ = true;
    t_switch_ = t_;
    result_.switchover_time = t_;
    reduced_coeffs_ = coeffs;
    reduced_partition_ = ModePartition(resolved(), n_, cfg_.padding_factor);
    result_.trace.back().switchover_event = true;
    result_.terminal_full_field = to_field(full_, t_);
    systems_dirty_ = true;
    return true;
  }

  void rebuild_systems() {
    systems_.clear();
    const double nu = cfg_.nu;
    auto clock = [this](double t) { return model_clock(t); };
    if (switched_) {
      systems_.push_back({std::move(reduced_),
                          make_rhs(reduced_partition_->n_resolved(), *reduced_partition_,
                                   reduced_coeffs_, nu, SystemRole::reduced, clock)});
    } else {
      const ModePartition p = partition();
      systems_.push_back({std::move(full_), make_rhs(n_, p, kFullCoefficients, nu,
                                                     SystemRole::full, clock)});
      if (cfg_.algorithm_case == AlgorithmCase::I) {
        systems_.push_back({std::move(reduced_),
                            make_rhs(p.n_resolved(), p, cfg_.model.coefficients(), nu,
                                     SystemRole::reduced, clock)});
      }
    }
    systems_dirty_ = false;
  }

  void unpack_systems() {
    if (switched_) {
      reduced_ = std::move(systems_[0].state);
    } else {
      full_ = std::move(systems_[0].state);
      if (systems_.size() > 1) reduced_ = std::move(systems_[1].state);
    }
    systems_.clear();
    systems_dirty_ = true;
  }

  void advance() {
    if (systems_dirty_) rebuild_systems();
    std::vector<OdeSystem*> ptrs;
    for (auto& s : systems_) ptrs.push_back(&s);
    const double remaining = cfg_.t_end - t_;
    StepOutcome out;
    try {
      out = integrator_.step(ptrs, t_, std::min(dt_next_, remaining));
    } catch (...) {
      unpack_systems();
      throw;
    }
    ++steps_;
    for (const auto& sys : systems_) {
      if (!all_finite(sys.state)) {
        unpack_systems();
        throw NumericalError("non-finite state at t = " + std::to_string(t_) +
                             "; reduce the fixed step");
      }
    }
    if (cfg_.integrator.method == StepMethod::fixed_rk4 &&
        out.dt_taken == cfg_.integrator.dt_fixed) {
      ++fixed_count_;
      t_ = fixed_origin_ + static_cast<double>(fixed_count_) * cfg_.integrator.dt_fixed;
    } else {
      t_ += out.dt_taken;
      fixed_origin_ = t_;
      fixed_count_ = 0;
    }
    if (out.dt_next > 0.0) dt_next_ = out.dt_next;
    unpack_systems();
  }

  void march() {
    const RenormState first = record(false, false);
    bool keep_going = on_record(first);
    long since_record = 0;
    while (keep_going && t_ < cfg_.t_end) {
      if (steps_ >= cfg_.max_steps) {
        throw NumericalError("maximum step count exceeded");
      }
      advance();
      ++since_record;
      const bool at_end = !(t_ < cfg_.t_end);
      if (switched_) {
        if (since_record >= cfg_.record_stride || at_end) {
          record_reduced_only(false);
          since_record = 0;
        }
        continue;
      }
      const bool due = since_record >= cfg_.record_stride || at_end;
      if (!due && mode_ == Mode::detect) continue;
      // Refining runs test the trigger on every step; rows still follow the stride.
      const RenormState s = record(false, false, due);
      const bool triggered = mode_ != Mode::detect && std::abs(s.detB) >= cfg_.tol;
      if (!due && !triggered) continue;
      if (!due) result_.trace.push_back(last_row_);
      since_record = 0;
      keep_going = on_record(s);
      if (switched_) keep_going = true;
    }
  }

  ExperimentConfig cfg_;
  Mode mode_;
  Integrator integrator_;
  int n_ = 0;
  double t_ = 0.0;
  double dt_next_ = 0.0;
  long steps_ = 0;
  double fixed_origin_ = 0.0;
  long fixed_count_ = 0;
  std::vector<Complex> full_;
  std::vector<Complex> reduced_;
  std::vector<OdeSystem> systems_;
  bool systems_dirty_ = true;
  bool switched_ = false;
  double t_switch_ = 0.0;
  int switch_delays_ = 0;
  CoefficientVector reduced_coeffs_{};
  std::optional<ModePartition> reduced_partition_;
  RunResult result_;
  TraceRecord last_row_;
};

}  // namespace

void ExperimentConfig::validate() const {
  std::ostringstream err;
  if (!(nu >= 0.0) || !std::isfinite(nu)) err << "viscosity must be >= 0; ";
  if (!is_power_of_two(n_start) || !is_power_of_two(n_final)) {
    err << "n_start and n_final must be powers of two; ";
  } else if (n_start > n_final) {
    err << "n_start must not exceed n_final; ";
  }
  if (!(tol >= 1e-16) || !std::isfinite(tol)) err << "TOL must be >= 1e-16; ";
  if (!(reduced_fraction > 0.0 && reduced_fraction <= 0.5)) {
    err << "reduced_fraction must lie in (0, 1/2]; ";
  } else if (is_power_of_two(n_start)) {
    const double inv = 1.0 / reduced_fraction;
    const int ratio = static_cast<int>(std::lround(inv));
    if (std::abs(inv - ratio) > 1e-12 || !is_power_of_two(ratio)) {
      err << "1/reduced_fraction must be a power of two; ";
    } else if (n_start / ratio < 2) {
      err << "n_start too small for reduced_fraction; ";
    }
  }
  if (padding_factor < 1) err << "padding_factor must be >= 1; ";
  if (!(t_end > 0.0) || !std::isfinite(t_end)) err << "t_end must be > 0; ";
  if (record_stride < 1) err << "record_stride must be >= 1; ";
  if (algorithm_case == AlgorithmCase::I &&
      model.kind() == ModelKind::Kind::identified) {
    err << "Case I needs a t-model or Galerkin reduced model; ";
  }
  const std::string msg = err.str();
  if (!msg.empty()) throw ConfigError("invalid experiment config: " + msg);
}

int ExperimentConfig::resolved_size(int n_total) const {
  return static_cast<int>(std::lround(n_total * reduced_fraction));
}

RunResult run_case1_detect(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.algorithm_case = AlgorithmCase::I;
  cfg.n_final = std::max(cfg.n_final, cfg.n_start);
  return Run(cfg, Mode::detect).execute();
}

RunResult run_case2_detect(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.algorithm_case = AlgorithmCase::II;
  cfg.n_final = std::max(cfg.n_final, cfg.n_start);
  return Run(cfg, Mode::detect).execute();
}

RunResult run_detect(const ExperimentConfig& config) {
  return config.algorithm_case == AlgorithmCase::I ? run_case1_detect(config)
                                                   : run_case2_detect(config);
}

RunResult run_refine(const ExperimentConfig& config) {
  return Run(config, Mode::refine).execute();
}

RunResult run_follow(const ExperimentConfig& config) {
  return Run(config, Mode::follow).execute();
}

CoefficientVector solve_coefficients(const Matrix2& B, std::array<double, 2> e) {
  const double det = determinant(B);
  if (!(std::abs(det) >= kSingularDetB) || !std::isfinite(det)) {
    throw NumericalError("solve_coefficients: B is singular (|detB| = " +
                         std::to_string(std::abs(det)) + ")");
  }
  return {(B[1][1] * e[0] - B[0][1] * e[1]) / det,
          (B[0][0] * e[1] - B[1][0] * e[0]) / det};
}

CalibrationResult calibrate_tol(const ExperimentConfig& config, int target_digits) {
  if (target_digits < 0 || target_digits > 16) {
    throw ConfigError("calibrate: target digits must lie in [0, 16]");
  }
  config.validate();
  CalibrationResult out;
  out.tol = config.tol;
  if (target_digits == 0) return out;

  int best = -1;
  for (double tol = config.tol; tol >= 1e-16 * (1.0 - 1e-9); tol *= 0.1) {
    ExperimentConfig s1 = config;
    s1.tol = std::max(tol, 1e-16);
    const RunResult r1 = run_refine(s1);
    ExperimentConfig s2 = s1;
    s2.n_start = s2.n_final;
    s2.t_end = r1.exhaustion_time.value_or(r1.t_final);
    const RunResult r2 = run_detect(s2);
    const ModeRange F = ModeRange::centered(config.resolved_size(config.n_final));
    const Quantities q1 = r1.exhaustion_quantities.value_or(quantities(r1.terminal_full_field, F));
    const Quantities q2 = quantities(r2.terminal_full_field, F);
    const int digits = std::min(digits_agreement(q1.e1, q2.e1), digits_agreement(q1.e2, q2.e2));
    ++out.iterations;
    best = std::max(best, digits);
    if (digits >= target_digits) {
      out.tol = s1.tol;
      out.digits = digits;
      return out;
    }
  }
  throw CalibrationError("calibrate: TOL reached 1e-16 with only " + std::to_string(best) +
                             " matching digits (target " + std::to_string(target_digits) + ")",
                         best);
}

std::optional<TurningPointReport> detect_turning_point(std::span<const TraceRecord> trace) {
  std::vector<double> ts, ev;
  for (const auto& r : trace) {
    if (r.b_singular || r.reduced_only) continue;
    if (!ts.empty() && r.t <= ts.back()) continue;
    ts.push_back(r.t);
    ev.push_back(r.eig2.real());
  }
  const std::size_t n = ts.size();
  if (n < 7) return std::nullopt;

  constexpr std::size_t kHalf = 2;  // 5-record window
  std::vector<double> smooth(n, 0.0);
  for (std::size_t i = kHalf; i + kHalf < n; ++i) {
    double s = 0.0;
    for (std::size_t j = i - kHalf; j <= i + kHalf; ++j) s += ev[j];
    smooth[i] = s / (2 * kHalf + 1);
  }
  std::size_t best = 0;
  double best_rate = -std::numeric_limits<double>::infinity();
  const std::size_t first = kHalf + 1;
  const std::size_t last = n - kHalf - 2;
  for (std::size_t i = first; i <= last; ++i) {
    const double rate = (smooth[i + 1] - smooth[i - 1]) / (ts[i + 1] - ts[i - 1]);
    if (rate > best_rate) {
      best_rate = rate;
      best = i;
    }
  }
  if (!(best_rate > 0.0) || best == first || best == last) return std::nullopt;
  TurningPointReport rep;
  rep.t_turn = ts[best];
  rep.eig_at_turn = smooth[best];
  return rep;
}

std::optional<double> crossing_time(std::span<const TraceRecord> low,
                                    std::span<const TraceRecord> high, double t_lo,
                                    double t_hi) {
  std::vector<std::pair<double, double>> lo;
  for (const auto& r : low) {
    if (!r.b_singular && !r.reduced_only) lo.emplace_back(r.t, r.eig2.real());
  }
  if (lo.size() < 2) return std::nullopt;
  auto interp_low = [&](double t) -> std::optional<double> {
    if (t < lo.front().first || t > lo.back().first) return std::nullopt;
    auto it = std::lower_bound(lo.begin(), lo.end(), t,
                               [](const auto& p, double v) { return p.first < v; });
    if (it == lo.begin()) return it->second;
    const auto& b = *it;
    const auto& a = *(it - 1);
    if (b.first == a.first) return b.second;
    return a.second + (b.second - a.second) * (t - a.first) / (b.first - a.first);
  };

  std::optional<std::pair<double, double>> prev;  // (t, high - low)
  for (const auto& r : high) {
    if (r.b_singular || r.reduced_only || r.t < t_lo || r.t > t_hi) continue;
    const auto l = interp_low(r.t);
    if (!l) continue;
    const double diff = r.eig2.real() - *l;
    if (prev && prev->second < 0.0 && diff >= 0.0) {
      const double f = prev->second / (prev->second - diff);
      return prev->first + f * (r.t - prev->first);
    }
    prev = std::make_pair(r.t, diff);
  }
  return std::nullopt;
}

}  // namespace renormesh
