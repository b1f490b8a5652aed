#include "dsq/fit.hpp"

#include "dsq/errors.hpp"
#include "dsq/units.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsq {
namespace {

struct Residuals : Eigen::DenseFunctor<double> {
  Residuals(const ModelSpec& m, const FitData& d)
      : DenseFunctor(static_cast<int>(m.parameter_names.size()), static_cast<int>(d.x.size())), model(m), data(d) {}

  int operator()(const InputType& p, ValueType& r) const {
    const std::vector<double> params(p.data(), p.data() + p.size());
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = (data.y[i] - model.f(params, data.x[i])) / data.sigma[i];
    }
    return 0;
  }

  const ModelSpec& model;
  const FitData& data;
};

double chi2(const ModelSpec& m, const FitData& d, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    const double r = (d.y[i] - m.f(p, d.x[i])) / d.sigma[i];
    s += r * r;
  }
  return s;
}

// Linear least squares for (c, a, b) in c + a cos(wx) + b sin(wx).
Eigen::Vector3d harmonic_fit(const FitData& d, double w, double* residual) {
  Eigen::MatrixXd a(d.x.size(), 3);
  Eigen::VectorXd y(d.x.size());
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double wt = 1.0 / d.sigma[i];
    a(r, 0) = wt;
    a(r, 1) = wt * std::cos(w * d.x[i]);
    a(r, 2) = wt * std::sin(w * d.x[i]);
    y(r) = wt * d.y[i];
  }
  Eigen::Vector3d sol = a.colPivHouseholderQr().solve(y);
  if (residual) *residual = (a * sol - y).squaredNorm();
  return sol;
}

}  // namespace

FitData fit_data_from_rows(const std::vector<ResultRow>& rows, bool use_model) {
  FitData d;
  for (const auto& r : rows) {
    d.x.push_back(r.x);
    d.y.push_back(use_model ? r.p_model : r.p_bright);
    const double p = (r.bright + 1.0) / (r.n_shots + 2.0);
    d.sigma.push_back(std::sqrt(p * (1.0 - p) / std::max(1, r.n_shots)));
  }
  return d;
}

FitReport fit_model(const ModelSpec& model, const FitData& data, std::vector<double> initial) {
  const std::size_t np = model.parameter_names.size();
  if (initial.size() != np) throw FitError(model.name + ": wrong number of initial parameters");
  if (data.x.size() <= np) throw FitError(model.name + ": not enough points to fit");

  Residuals functor(model, data);
  Eigen::NumericalDiff<Residuals, Eigen::Central> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals, Eigen::Central>> lm(numdiff);
  lm.setMaxfev(2000 * static_cast<Eigen::Index>(np + 1));
  lm.setXtol(1e-12);
  lm.setFtol(1e-12);
  Eigen::VectorXd p = Eigen::Map<Eigen::VectorXd>(initial.data(), static_cast<Eigen::Index>(np));
  const auto status = lm.minimize(p);

  FitReport rep;
  rep.model = model.name;
  rep.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                  status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation && p.allFinite();
  std::vector<double> best(p.data(), p.data() + np);
  const double dof = static_cast<double>(data.x.size() - np);
  rep.reduced_chi2 = chi2(model, data, best) / dof;

  // Covariance from a central-difference Jacobian at the optimum.
  Eigen::MatrixXd jac(data.x.size(), np);
  for (std::size_t j = 0; j < np; ++j) {
    const double h = 1e-6 * std::max(std::abs(best[j]), 1e-6);
    auto up = best, dn = best;
    up[j] += h;
    dn[j] -= h;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (model.f(up, data.x[i]) - model.f(dn, data.x[i])) / (2.0 * h) / data.sigma[i];
    }
  }
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  for (std::size_t j = 0; j < np; ++j) {
    FitParameter fp;
    fp.name = model.parameter_names[j];
    fp.unit = j < model.parameter_units.size() ? model.parameter_units[j] : "";
    fp.value = best[j];
    const double var = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) * std::max(1.0, rep.reduced_chi2);
    fp.uncertainty = var > 0.0 ? std::sqrt(var) : 0.0;
    rep.parameters.push_back(fp);
  }
  return rep;
}

double scan_frequency(const FitData& data) {
  if (data.x.size() < 4) throw FitError("frequency scan needs at least 4 points");
  std::vector<double> xs = data.x;
  std::sort(xs.begin(), xs.end());
  const double span = xs.back() - xs.front();
  double min_step = span;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[i - 1]) min_step = std::min(min_step, xs[i] - xs[i - 1]);
  }
  if (!(span > 0.0)) throw FitError("frequency scan needs a non-zero x span");
  const double w_max = kPi / min_step;
  const double w_step = kTwoPi / span / 20.0;
  double best_w = w_step;
  double best_r = std::numeric_limits<double>::infinity();
  for (double w = w_step; w <= w_max; w += w_step) {
    double r = 0.0;
    harmonic_fit(data, w, &r);
    if (r < best_r) {
      best_r = r;
      best_w = w;
    }
  }
  return best_w;
}

FitReport fit_rabi(const FitData& data) {
  ModelSpec m{"A*sin^2(omega*t/2)+c",
              {"A", "omega", "c"},
              {"", "rad/s", ""},
              [](const std::vector<double>& p, double t) {
                const double s = std::sin(0.5 * p[1] * t);
                return p[0] * s * s + p[2];
              }};
  const double w = scan_frequency(data);
  const Eigen::Vector3d h = harmonic_fit(data, w, nullptr);
  const double amp = std::hypot(h(1), h(2));
  return fit_model(m, data, {2.0 * amp, w, h(0) - amp});
}

FitReport fit_damped_sinusoid(const FitData& data) {
  ModelSpec m{"c+A*exp(-gamma*t)*cos(omega*t+phi)",
              {"c", "A", "gamma", "omega", "phi"},
              {"", "", "1/s", "rad/s", "rad"},
              [](const std::vector<double>& p, double t) {
                return p[0] + p[1] * std::exp(-p[2] * t) * std::cos(p[3] * t + p[4]);
              }};
  const double w = scan_frequency(data);
  const Eigen::Vector3d h = harmonic_fit(data, w, nullptr);
  const double amp = std::hypot(h(1), h(2));
  const double phi = std::atan2(-h(2), h(1));
  auto rep = fit_model(m, data, {h(0), amp, 0.0, w, phi});
  // Canonical sign: A >= 0 with phi folded into (-pi, pi].
  if (rep.parameters[1].value < 0.0) {
    rep.parameters[1].value = -rep.parameters[1].value;
    rep.parameters[4].value += kPi;
  }
  rep.parameters[4].value = std::remainder(rep.parameters[4].value, kTwoPi);
  return rep;
}

FitReport fit_exponential(const FitData& data) {
  ModelSpec m{"c+A*exp(-rate*t)",
              {"c", "A", "rate"},
              {"", "", "1/s"},
              [](const std::vector<double>& p, double t) { return p[0] + p[1] * std::exp(-p[2] * t); }};
  const auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
  const double span = *hi - *lo;
  const std::size_t first = static_cast<std::size_t>(lo - data.x.begin());
  const std::size_t last = static_cast<std::size_t>(hi - data.x.begin());
  // Try a few starting rates and keep the best.
  FitReport best;
  double best_chi = std::numeric_limits<double>::infinity();
  for (double scale : {0.3, 1.0, 3.0}) {
    const double rate = scale / std::max(span, 1e-300);
    const double decay = std::exp(-rate * span);
    const double a = (data.y[first] - data.y[last]) / std::max(1.0 - decay, 1e-9);
    const double c = data.y[first] - a;
    FitReport r = fit_model(m, data, {c, a, rate});
    const double chi = r.reduced_chi2;
    if (r.converged && chi < best_chi) {
      best_chi = chi;
      best = r;
    }
  }
  if (best.parameters.empty()) throw FitError("exponential fit did not converge");
  return best;
}

FitReport fit_gaussian_decay(const FitData& data) {
  ModelSpec m{"c+A*exp(-kappa*t^2)",
              {"c", "A", "kappa"},
              {"", "", "1/s^2"},
              [](const std::vector<double>& p, double t) { return p[0] + p[1] * std::exp(-p[2] * t * t); }};
  const auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
  const double span = *hi - *lo;
  const std::size_t first = static_cast<std::size_t>(lo - data.x.begin());
  FitReport best;
  double best_chi = std::numeric_limits<double>::infinity();
  for (double scale : {0.3, 1.0, 3.0}) {
    const double kappa = scale / std::max(span * span, 1e-300);
    const double c = 0.5;
    FitReport r = fit_model(m, data, {c, data.y[first] - c, kappa});
    if (r.converged && r.reduced_chi2 < best_chi) {
      best_chi = r.reduced_chi2;
      best = r;
    }
  }
  if (best.parameters.empty()) throw FitError("gaussian decay fit did not converge");
  return best;
}

void check_fit(const FitReport& report, double max_reduced_chi2) {
  if (!report.converged) throw FitError(report.model + ": fit did not converge");
  if (!(report.reduced_chi2 <= max_reduced_chi2)) {
    throw FitError(report.model + ": reduced chi^2 " + format_exact(report.reduced_chi2) + " exceeds bound " +
                   format_exact(max_reduced_chi2));
  }
}

}  // namespace dsq
