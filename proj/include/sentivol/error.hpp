#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sentivol {

enum class Errc {
  invalid_argument,
  file_not_found,
  malformed_record,
  empty_file,
  empty_keyword_list,
  missing_column,
  duplicate_date,
  non_numeric_value,
  empty_intersection,
  spline_fill_impossible,
  non_finite_input,
  empty_input,
  nonpositive_price,
  too_few_points,
  duplicate_x,
  too_few_knots,
  out_of_range_x,
  target_outside_span,
  rank_deficient_design,
  insufficient_observations,
  all_zero_residuals,
  nonpositive_init,
  nu_out_of_range,
  nonpositive_variance,
  non_finite_likelihood,
  no_convergence,
  invalid_params,
  missing_series,
  config_error,
  io_error,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::file_not_found: return "file-not-found";
    case Errc::malformed_record: return "malformed-record";
    case Errc::empty_file: return "empty-file";
    case Errc::empty_keyword_list: return "empty-keyword-list";
    case Errc::missing_column: return "missing-column";
    case Errc::duplicate_date: return "duplicate-date";
    case Errc::non_numeric_value: return "non-numeric-value";
    case Errc::empty_intersection: return "empty-intersection";
    case Errc::spline_fill_impossible: return "spline-fill-impossible";
    case Errc::non_finite_input: return "non-finite-input";
    case Errc::empty_input: return "empty-input";
    case Errc::nonpositive_price: return "nonpositive-price";
    case Errc::too_few_points: return "too-few-points";
    case Errc::duplicate_x: return "duplicate-x";
    case Errc::too_few_knots: return "too-few-knots";
    case Errc::out_of_range_x: return "out-of-range-x";
    case Errc::target_outside_span: return "target-outside-span";
    case Errc::rank_deficient_design: return "rank-deficient-design";
    case Errc::insufficient_observations: return "insufficient-observations";
    case Errc::all_zero_residuals: return "all-zero-residuals";
    case Errc::nonpositive_init: return "nonpositive-init";
    case Errc::nu_out_of_range: return "nu-out-of-range";
    case Errc::nonpositive_variance: return "nonpositive-variance";
    case Errc::non_finite_likelihood: return "non-finite-likelihood";
    case Errc::no_convergence: return "no-convergence";
    case Errc::invalid_params: return "invalid-params";
    case Errc::missing_series: return "missing-series";
    case Errc::config_error: return "config-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

/// Library error. `what()` is the full message, prefixed with the pipeline
/// stage once a stage has been attached.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(compose({}, code, detail)), code_(code), detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  Error with_stage(std::string stage) const {
    Error e(code_, detail_);
    e.stage_ = std::move(stage);
    static_cast<std::runtime_error&>(e) = std::runtime_error(compose(e.stage_, code_, detail_));
    return e;
  }

  /// Numerical failures map to CLI exit code 2, everything else to 1.
  bool is_numerical() const noexcept {
    return code_ == Errc::no_convergence || code_ == Errc::non_finite_likelihood;
  }

 private:
  static std::string compose(const std::string& stage, Errc code, const std::string& detail) {
    std::string out;
    if (!stage.empty()) out += stage + ": ";
    out += std::string(to_string(code));
    if (!detail.empty()) out += ": " + detail;
    return out;
  }

  Errc code_;
  std::string detail_;
  std::string stage_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail = {}) { throw Error(code, detail); }

}  // namespace sentivol
