#pragma once

#include "dsq/result.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dsq {

struct FitData {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;  // standard error of each y
};

/// Binomial standard errors for bright fractions, with a Laplace-smoothed
/// p so that all-bright or all-dark points keep a finite weight.
FitData fit_data_from_rows(const std::vector<ResultRow>& rows, bool use_model = false);

using ModelFn = std::function<double(const std::vector<double>& params, double x)>;

struct ModelSpec {
  std::string name;
  std::vector<std::string> parameter_names;
  std::vector<std::string> parameter_units;
  ModelFn f;
};

/// Weighted Levenberg-Marquardt. Uncertainties are the covariance diagonal
/// scaled by the reduced chi^2.
FitReport fit_model(const ModelSpec& model, const FitData& data, std::vector<double> initial);

/// Best angular frequency of c + a cos(w x) + b sin(w x) over a dense grid
/// up to the Nyquist limit of the sampling.
double scan_frequency(const FitData& data);

/// P = A sin^2(Omega t / 2) + c. Parameters: A, omega, c.
FitReport fit_rabi(const FitData& data);

/// P = c + A exp(-gamma t) cos(omega t + phi). Parameters: c, A, gamma, omega, phi.
FitReport fit_damped_sinusoid(const FitData& data);

/// P = c + A exp(-rate t). Parameters: c, A, rate.
FitReport fit_exponential(const FitData& data);

/// P = c + A exp(-kappa t^2); the 1/e time is kappa^-1/2. Parameters: c, A, kappa.
FitReport fit_gaussian_decay(const FitData& data);

/// Throws FitError if the fit did not converge or the reduced chi^2
/// exceeds the bound.
void check_fit(const FitReport& report, double max_reduced_chi2);

}  // namespace dsq
