#include "circsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "circsim/errors.hpp"
#include "circsim/units.hpp"

namespace circsim::fit {

namespace {

std::vector<std::string> layout_names(const FitModel& m) {
  std::vector<std::string> names;
  switch (m.kind) {
    case ModelKind::gaussian_multi:
      if (m.shared_width) {
        for (int i = 0; i < m.n_peaks; ++i)
          names.push_back("amp" + std::to_string(i + 1));
        for (int i = 0; i < m.n_peaks; ++i)
          names.push_back("center" + std::to_string(i + 1));
        names.push_back("width");
        names.push_back("offset");
      } else {
        for (int i = 0; i < m.n_peaks; ++i) {
          names.push_back("amp" + std::to_string(i + 1));
          names.push_back("center" + std::to_string(i + 1));
          names.push_back("width" + std::to_string(i + 1));
        }
        names.push_back("offset");
      }
      break;
    case ModelKind::rabi_lineshape:
      names = {"amp", "center", "offset"};
      break;
    case ModelKind::sine:
      names = {"offset", "amp", "freq", "phase"};
      break;
    case ModelKind::linear:
      names = {"intercept", "slope"};
      break;
  }
  return names;
}

// Value and analytic gradient with respect to every parameter.
double eval_grad(const FitModel& m, const std::vector<double>& p, double x,
                 std::vector<double>* grad) {
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);
  switch (m.kind) {
    case ModelKind::gaussian_multi: {
      int k = m.n_peaks;
      double y;
      if (m.shared_width) {
        double w = p[2 * k], off = p[2 * k + 1];
        y = off;
        double dw_sum = 0.0;
        for (int i = 0; i < k; ++i) {
          double a = p[i], c = p[k + i];
          double t = (x - c) / w;
          double g = std::exp(-0.5 * t * t);
          y += a * g;
          if (grad) {
            (*grad)[i] = g;
            (*grad)[k + i] = a * g * t / w;
            dw_sum += a * g * t * t / w;
          }
        }
        if (grad) {
          (*grad)[2 * k] = dw_sum;
          (*grad)[2 * k + 1] = 1.0;
        }
      } else {
        double off = p[3 * k];
        y = off;
        for (int i = 0; i < k; ++i) {
          double a = p[3 * i], c = p[3 * i + 1], w = p[3 * i + 2];
          double t = (x - c) / w;
          double g = std::exp(-0.5 * t * t);
          y += a * g;
          if (grad) {
            (*grad)[3 * i] = g;
            (*grad)[3 * i + 1] = a * g * t / w;
            (*grad)[3 * i + 2] = a * g * t * t / w;
          }
        }
        if (grad) (*grad)[3 * k] = 1.0;
      }
      return y;
    }
    case ModelKind::rabi_lineshape: {
      double a = p[0], c = p[1], off = p[2];
      double w2 = m.rabi_kHz * m.rabi_kHz;
      double d = x - c;
      double f2 = w2 + d * d;
      double cyc = std::sqrt(f2) * m.duration_us * 1e-3;
      double s = std::sin(pi * cyc);
      double shape = (f2 > 0.0) ? (w2 / f2) * s * s : 0.0;
      if (grad) {
        (*grad)[0] = shape;
        // d(shape)/dd then chain to center (dd/dc = -1).
        double dshape_dd = 0.0;
        if (f2 > 0.0) {
          double dcyc_dd = d * m.duration_us * 1e-3 / std::sqrt(f2);
          dshape_dd = -2.0 * w2 * d / (f2 * f2) * s * s +
                      (w2 / f2) * 2.0 * s * std::cos(pi * cyc) * pi * dcyc_dd;
        }
        (*grad)[1] = -a * dshape_dd;
        (*grad)[2] = 1.0;
      }
      return off + a * shape;
    }
    case ModelKind::sine: {
      double off = p[0], a = p[1], f = p[2], ph = p[3];
      double arg = two_pi * f * x + ph;
      if (grad) {
        (*grad)[0] = 1.0;
        (*grad)[1] = std::cos(arg);
        (*grad)[2] = -a * std::sin(arg) * two_pi * x;
        (*grad)[3] = -a * std::sin(arg);
      }
      return off + a * std::cos(arg);
    }
    case ModelKind::linear: {
      if (grad) {
        (*grad)[0] = 1.0;
        (*grad)[1] = x;
      }
      return p[0] + p[1] * x;
    }
  }
  throw std::logic_error("unhandled model kind");
}

double clamp_to(const Parameter& par, double v) {
  return std::min(std::max(v, par.lower), par.upper);
}

}  // namespace

FitModel FitModel::gaussians(int n_peaks, bool shared_width) {
  if (n_peaks < 1) throw ConfigError("gaussian model needs at least one peak");
  FitModel m;
  m.kind = ModelKind::gaussian_multi;
  m.n_peaks = n_peaks;
  m.shared_width = shared_width;
  for (const auto& name : layout_names(m)) m.params.push_back({name});
  for (auto& par : m.params) {
    if (par.name.rfind("width", 0) == 0) par.lower = 1e-12;
  }
  return m;
}

FitModel FitModel::rabi(double rabi_kHz, double duration_us) {
  if (rabi_kHz <= 0.0 || duration_us <= 0.0) {
    throw ConfigError("rabi lineshape needs positive rabi and duration");
  }
  FitModel m;
  m.kind = ModelKind::rabi_lineshape;
  m.rabi_kHz = rabi_kHz;
  m.duration_us = duration_us;
  for (const auto& name : layout_names(m)) m.params.push_back({name});
  return m;
}

FitModel FitModel::fringe() {
  FitModel m;
  m.kind = ModelKind::sine;
  for (const auto& name : layout_names(m)) m.params.push_back({name});
  return m;
}

FitModel FitModel::line() {
  FitModel m;
  m.kind = ModelKind::linear;
  for (const auto& name : layout_names(m)) m.params.push_back({name});
  return m;
}

Parameter& FitModel::param(const std::string& name) {
  for (auto& p : params)
    if (p.name == name) return p;
  throw ConfigError("no fit parameter named '" + name + "'");
}

const Parameter& FitModel::param(const std::string& name) const {
  return const_cast<FitModel*>(this)->param(name);
}

double eval(const FitModel& model, const std::vector<double>& values,
            double x) {
  if (values.size() != model.params.size()) {
    throw ConfigError("parameter count does not match the model layout");
  }
  return eval_grad(model, values, x, nullptr);
}

double FitResult::value(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p.value;
  throw ConfigError("no fit parameter named '" + name + "'");
}

double FitResult::sigma_of(const std::string& name) const {
  for (size_t i = 0; i < params.size(); ++i)
    if (params[i].name == name) return sigma[i];
  throw ConfigError("no fit parameter named '" + name + "'");
}

FitResult fit(const seq::SpectrumDataset& data, const FitModel& model) {
  return fit(data.axis, data.value, data.error, model);
}

FitResult fit(const std::vector<double>& x, const std::vector<double>& y,
              const std::vector<double>& yerr, const FitModel& model) {
  size_t npts = x.size();
  if (y.size() != npts) throw ConfigError("x and y lengths differ");
  size_t npar = model.params.size();
  if (layout_names(model).size() != npar) {
    throw ConfigError("parameter count does not match the model layout");
  }

  std::vector<int> free_idx;
  for (size_t j = 0; j < npar; ++j) {
    if (!model.params[j].fixed) free_idx.push_back(static_cast<int>(j));
  }
  size_t nfree = free_idx.size();
  if (nfree == 0) throw ConfigError("fit needs at least one free parameter");
  if (npts <= nfree) {
    throw ConfigError("fit needs more points than free parameters");
  }
  for (const auto& p : model.params) {
    if (!(p.lower <= p.value && p.value <= p.upper)) {
      throw ConfigError("seed for '" + p.name + "' violates its bounds");
    }
  }

  bool have_errors = yerr.size() == npts &&
                     std::all_of(yerr.begin(), yerr.end(),
                                 [](double e) { return e > 0.0; });
  std::vector<double> rw(npts, 1.0);  // root weights
  if (have_errors) {
    for (size_t i = 0; i < npts; ++i) rw[i] = 1.0 / yerr[i];
  }

  std::vector<double> p(npar);
  for (size_t j = 0; j < npar; ++j) p[j] = model.params[j].value;

  auto chi2_of = [&](const std::vector<double>& pars) {
    double s = 0.0;
    for (size_t i = 0; i < npts; ++i) {
      double r = (y[i] - eval_grad(model, pars, x[i], nullptr)) * rw[i];
      s += r * r;
    }
    return s;
  };

  Eigen::MatrixXd jac(npts, nfree);
  Eigen::VectorXd res(npts);
  std::vector<double> grad(npar);

  auto build = [&](const std::vector<double>& pars) {
    for (size_t i = 0; i < npts; ++i) {
      double f = eval_grad(model, pars, x[i], &grad);
      res(static_cast<Eigen::Index>(i)) = (y[i] - f) * rw[i];
      for (size_t j = 0; j < nfree; ++j) {
        jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            grad[free_idx[j]] * rw[i];
      }
    }
  };

  FitResult out;
  out.params = model.params;
  out.sigma.assign(npar, 0.0);
  out.dof = static_cast<int>(npts - nfree);

  double chi2 = chi2_of(p);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  std::string message;

  for (; iter < 200 && !converged; ++iter) {
    build(p);
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd jtr = jac.transpose() * res;

    double gnorm = jtr.lpNorm<Eigen::Infinity>();
    if (gnorm <= 1e-10 * std::max(1.0, chi2)) {
      converged = true;
      break;
    }

    bool accepted = false;
    for (int trial = 0; trial < 25; ++trial) {
      Eigen::MatrixXd damped = jtj;
      for (size_t j = 0; j < nfree; ++j) {
        auto jj = static_cast<Eigen::Index>(j);
        damped(jj, jj) += lambda * std::max(jtj(jj, jj), 1e-30);
      }
      Eigen::LDLT<Eigen::MatrixXd> solver(damped);
      if (solver.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      Eigen::VectorXd step = solver.solve(jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> trial_p = p;
      double step_rel = 0.0;
      for (size_t j = 0; j < nfree; ++j) {
        int jj = free_idx[j];
        trial_p[jj] = clamp_to(model.params[jj],
                               p[jj] + step(static_cast<Eigen::Index>(j)));
        step_rel = std::max(step_rel, std::abs(trial_p[jj] - p[jj]) /
                                          std::max(1.0, std::abs(p[jj])));
      }
      double trial_chi2 = chi2_of(trial_p);
      if (trial_chi2 <= chi2) {
        bool tiny = trial_chi2 >= chi2 * (1.0 - 1e-14) && step_rel < 1e-12;
        p = trial_p;
        chi2 = trial_chi2;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (tiny) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No downhill step found at any damping: either converged in the
      // numerical sense or stuck; re-check the gradient to decide.
      build(p);
      double gnorm2 = (jac.transpose() * res).lpNorm<Eigen::Infinity>();
      converged = gnorm2 <= 1e-6 * std::max(1.0, chi2);
      if (!converged) message = "no downhill step found";
      break;
    }
  }
  if (!converged && message.empty() && iter >= 200) {
    message = "iteration cap reached";
  }

  build(p);
  Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (!lu.isInvertible()) {
    converged = false;
    if (message.empty()) message = "degenerate jacobian";
  } else {
    Eigen::MatrixXd cov = lu.inverse();
    double scale = 1.0;
    if (!have_errors && out.dof > 0) scale = chi2 / out.dof;
    for (size_t j = 0; j < nfree; ++j) {
      auto jj = static_cast<Eigen::Index>(j);
      double v = cov(jj, jj) * scale;
      out.sigma[free_idx[j]] = v > 0.0 ? std::sqrt(v) : 0.0;
    }
  }

  for (size_t j = 0; j < npar; ++j) out.params[j].value = p[j];
  out.chi2 = chi2;
  out.converged = converged;
  out.iterations = iter;
  out.message = message;
  return out;
}

}  // namespace circsim::fit
