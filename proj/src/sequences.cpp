#include "circsim/sequences.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <variant>

#include "circsim/errors.hpp"
#include "circsim/propagator.hpp"
#include "circsim/rng.hpp"

namespace circsim::seq {

namespace {

struct PathRef {
  bool none = false;
  bool shared = false;
  int step = -1;
  std::string field;
};

std::vector<std::string> fields_for(const dyn::PulseSpec& pulse) {
  return std::visit(
      [](const auto& p) -> std::vector<std::string> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, dyn::MicrowavePulse>) {
          return {"source_freq", "rabi", "duration"};
        } else if constexpr (std::is_same_v<T, dyn::RamanPulse>) {
          return {"small_delta", "duration", "omega_pi", "omega_sigma",
                  "big_delta"};
        } else {
          return {"duration"};
        }
      },
      pulse);
}

double* field_ptr(dyn::PulseSpec& pulse, const std::string& field) {
  return std::visit(
      [&](auto& p) -> double* {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, dyn::MicrowavePulse>) {
          if (field == "source_freq") return &p.source_freq_GHz;
          if (field == "rabi") return &p.rabi_kHz;
          if (field == "duration") return &p.duration_us;
        } else if constexpr (std::is_same_v<T, dyn::RamanPulse>) {
          if (field == "small_delta") return &p.small_delta_kHz;
          if (field == "omega_pi") return &p.omega_pi_kHz;
          if (field == "omega_sigma") return &p.omega_sigma_kHz;
          if (field == "big_delta") return &p.big_delta_GHz;
          if (field == "duration") return &p.duration_us;
        } else {
          if (field == "duration") return &p.duration_us;
        }
        return nullptr;
      },
      pulse);
}

bool any_shared_mw(const std::vector<dyn::Step>& steps) {
  for (const auto& s : steps) {
    if (const auto* mw = std::get_if<dyn::MicrowavePulse>(&s.pulse)) {
      if (mw->use_shared_source) return true;
    }
  }
  return false;
}

PathRef parse_path(const SequenceSpec& spec, const std::string& path) {
  PathRef ref;
  if (path.empty()) {
    ref.none = true;
    return ref;
  }
  if (path == "shared.source_freq") {
    if (!any_shared_mw(spec.steps)) {
      throw ConfigError(
          "scan path 'shared.source_freq' needs at least one microwave pulse "
          "with use_shared_source");
    }
    ref.shared = true;
    return ref;
  }
  int k = -1;
  int consumed = 0;
  if (std::sscanf(path.c_str(), "steps[%d].%n", &k, &consumed) == 1 &&
      consumed > 0 && k >= 0 && k < static_cast<int>(spec.steps.size())) {
    std::string field = path.substr(consumed);
    auto fields = fields_for(spec.steps[k].pulse);
    if (std::find(fields.begin(), fields.end(), field) != fields.end()) {
      ref.step = k;
      ref.field = field;
      return ref;
    }
  }
  std::ostringstream msg;
  msg << "unknown scan path '" << path << "'; valid paths:";
  for (const auto& p : valid_scan_paths(spec)) msg << " " << p;
  throw ConfigError(msg.str());
}

bool targets_mw_source(const SequenceSpec& spec, const PathRef& ref) {
  if (ref.shared) return true;
  if (ref.step >= 0 && ref.field == "source_freq") {
    return std::holds_alternative<dyn::MicrowavePulse>(
        spec.steps[ref.step].pulse);
  }
  return false;
}

double source_multiplier(const SequenceSpec& spec, const PathRef& ref) {
  if (ref.shared) {
    for (const auto& s : spec.steps) {
      if (const auto* mw = std::get_if<dyn::MicrowavePulse>(&s.pulse)) {
        if (mw->use_shared_source) return mw->two_photon ? 2.0 : 1.0;
      }
    }
    return 1.0;
  }
  if (ref.step >= 0) {
    if (const auto* mw =
            std::get_if<dyn::MicrowavePulse>(&spec.steps[ref.step].pulse)) {
      return mw->two_photon ? 2.0 : 1.0;
    }
  }
  return 1.0;
}

int first_affected_step(const SequenceSpec& spec, const PathRef& ref) {
  if (ref.none) return static_cast<int>(spec.steps.size());
  if (ref.shared) {
    for (size_t k = 0; k < spec.steps.size(); ++k) {
      if (const auto* mw =
              std::get_if<dyn::MicrowavePulse>(&spec.steps[k].pulse)) {
        if (mw->use_shared_source) return static_cast<int>(k);
      }
    }
    return static_cast<int>(spec.steps.size());
  }
  return ref.step;
}

std::string axis_unit_for(const PathRef& ref) {
  if (ref.none) return "";
  if (ref.shared || ref.field == "source_freq" || ref.field == "big_delta") {
    return "GHz";
  }
  if (ref.field == "duration") return "us";
  return "kHz";
}

std::string raman_key(const dyn::RamanPulse& rp) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "raman:%.17g:%.17g:%.17g:%.17g:%.17g:%d",
                rp.big_delta_GHz, rp.small_delta_kHz, rp.omega_pi_kHz,
                rp.omega_sigma_kHz, rp.duration_us, rp.scattering_on ? 1 : 0);
  return buf;
}

void apply_pump_imperfection(dyn::QuantumState& st, double leak, double loss) {
  if (leak <= 0.0 && loss <= 0.0) return;
  const dyn::Basis& b = st.basis();
  Eigen::MatrixXcd& rho = st.rho();
  for (int m = 0; m < b.n_manifolds(); ++m) {
    int blk = 8 * m;
    double p4d = 0.0;
    for (int s = 4; s < 8; ++s) p4d += rho(blk + s, blk + s).real();
    if (p4d <= 0.0) continue;
    rho(blk + 0, blk + 0) += 0.5 * leak * p4d;
    rho(blk + 1, blk + 1) += 0.5 * leak * p4d;
    if (loss > 0.0) {
      int sink = b.sink_index();
      rho(sink, sink) += loss * p4d;
    }
    for (int s = 4; s < 8; ++s) rho(blk + s, blk + s) *= 1.0 - leak - loss;
  }
}

struct ChainEvaluator {
  std::shared_ptr<const dyn::Basis> basis;
  const ModelBundle* bundle;
  double leak = 0.0;
  double loss = 0.0;
  std::map<std::string, dyn::Propagator> raman_cache;

  void apply_step(dyn::QuantumState& st, double& clock, const dyn::Step& step,
                  std::optional<dyn::ProbePulse>& probe) {
    clock += step.delay_before_us;
    if (const auto* mw = std::get_if<dyn::MicrowavePulse>(&step.pulse)) {
      dyn::mw_propagator(basis, *mw).apply(st, clock);
      clock += mw->duration_us;
    } else if (const auto* rp = std::get_if<dyn::RamanPulse>(&step.pulse)) {
      std::string key = raman_key(*rp);
      auto it = raman_cache.find(key);
      if (it == raman_cache.end()) {
        it = raman_cache
                 .emplace(key, dyn::raman_propagator(basis, *rp,
                                                     bundle->pump.gamma_p_MHz))
                 .first;
      }
      it->second.apply(st, clock);
      clock += rp->duration_us;
    } else if (const auto* op = std::get_if<dyn::OpticalPump422>(&step.pulse)) {
      st = dyn::pump_evolution(*op, st, bundle->pump);
      double active =
          op->duration_us + (op->repumper_on ? op->repumper_overhang_us : 0.0);
      if (op->repumper_on && active > 0.0) {
        apply_pump_imperfection(st, leak, loss);
      }
      clock += active;
    } else if (const auto* pp = std::get_if<dyn::ProbePulse>(&step.pulse)) {
      probe = *pp;
      clock += pp->duration_us;
    }
  }
};

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

double ratio_or_zero(double num, double den) {
  return den > 1e-15 ? num / den : 0.0;
}

// r = num/(num+other): error from independent errors on the two rates.
double ratio_se(double num, double other, double se_num, double se_other) {
  double sum = num + other;
  if (sum <= 1e-15) return 0.0;
  return std::sqrt(other * other * se_num * se_num +
                   num * num * se_other * se_other) /
         (sum * sum);
}

const char* mode_name(core::ShiftMode m) {
  return m == core::ShiftMode::exact_hydrogenic ? "exact_hydrogenic"
                                                : "power_law";
}

}  // namespace

std::string Observable::name() const {
  switch (kind) {
    case ObservableKind::channel:
      return "p" + std::to_string(channel_n);
    case ObservableKind::normalized:
      return "p" + std::to_string(channel_n) + "_norm";
    case ObservableKind::raman_ratio:
      return "raman_transfer_ratio";
  }
  return "observable";
}

double DetectionRecord::channel_or_zero(int n) const {
  auto it = channel.find(n);
  return it == channel.end() ? 0.0 : it->second;
}

std::vector<std::pair<double, double>> gauss_hermite_unit(int n) {
  if (n < 1) throw ConfigError("quadrature order must be >= 1");
  if (n == 1) return {{0.0, 1.0}};
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = std::sqrt(0.5 * k);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  std::vector<std::pair<double, double>> nodes(n);
  for (int i = 0; i < n; ++i) {
    double v0 = es.eigenvectors()(0, i);
    nodes[i] = {std::sqrt(2.0) * es.eigenvalues()(i), v0 * v0};
  }
  return nodes;
}

DetectionRecord detect(const dyn::QuantumState& state,
                       const std::optional<dyn::ProbePulse>& probe) {
  const dyn::Basis& b = state.basis();
  DetectionRecord rec;
  for (int n : b.manifolds()) rec.channel[n] = state.manifold_population(n);
  if (b.has_sink()) {
    rec.channel[b.home_n()] += state.population(b.sink_index());
  }
  if (probe) {
    double moved = state.manifold_population(probe->n_from);
    rec.channel[probe->n_from] -= moved;
    rec.channel[probe->n_to] += moved;
  }
  return rec;
}

std::vector<std::string> valid_scan_paths(const SequenceSpec& spec) {
  std::vector<std::string> out;
  for (size_t k = 0; k < spec.steps.size(); ++k) {
    for (const auto& f : fields_for(spec.steps[k].pulse)) {
      out.push_back("steps[" + std::to_string(k) + "]." + f);
    }
  }
  if (any_shared_mw(spec.steps)) out.push_back("shared.source_freq");
  return out;
}

void apply_scan_value(std::vector<dyn::Step>& steps, const std::string& path,
                      double value) {
  if (path.empty()) return;
  if (path == "shared.source_freq") {
    bool hit = false;
    for (auto& s : steps) {
      if (auto* mw = std::get_if<dyn::MicrowavePulse>(&s.pulse)) {
        if (mw->use_shared_source) {
          mw->source_freq_GHz = value;
          hit = true;
        }
      }
    }
    if (!hit) {
      throw ConfigError("no microwave pulse uses the shared source");
    }
    return;
  }
  int k = -1;
  int consumed = 0;
  if (std::sscanf(path.c_str(), "steps[%d].%n", &k, &consumed) == 1 &&
      consumed > 0 && k >= 0 && k < static_cast<int>(steps.size())) {
    if (double* p = field_ptr(steps[k].pulse, path.substr(consumed))) {
      *p = value;
      return;
    }
  }
  throw ConfigError("unknown scan path '" + path + "'");
}

void validate_sequence(const SequenceSpec& spec, const ModelBundle& bundle) {
  dyn::Basis basis(spec.basis_manifolds, bundle.shift, bundle.nu0, true);
  if (spec.initial.components.empty()) {
    throw ConfigError("initial state needs at least one component");
  }
  for (const auto& [level, weight] : spec.initial.components) {
    basis.index_of(level);
    if (weight <= 0.0) {
      throw ConfigError("initial state weights must be > 0");
    }
  }
  if (spec.initial.bg_fraction < 0.0 || spec.initial.bg_fraction >= 1.0) {
    throw ConfigError("background fraction must be in [0, 1)");
  }
  for (size_t k = 0; k < spec.steps.size(); ++k) {
    const auto& step = spec.steps[k];
    std::string at = "steps[" + std::to_string(k) + "]";
    if (step.delay_before_us < 0.0) {
      throw ConfigError(at + ".delay_before must be >= 0");
    }
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if (p.duration_us < 0.0) {
            throw ConfigError(at + ".duration must be >= 0");
          }
          if constexpr (std::is_same_v<T, dyn::MicrowavePulse>) {
            if (!basis.has_manifold(p.n_hi) || !basis.has_manifold(p.n_lo)) {
              throw ConfigError(at + " references a manifold not in the basis");
            }
          } else if constexpr (std::is_same_v<T, dyn::RamanPulse>) {
            if (p.big_delta_GHz == 0.0) {
              throw ConfigError(at + ".big_delta must be nonzero");
            }
          } else if constexpr (std::is_same_v<T, dyn::ProbePulse>) {
            if (k + 1 != spec.steps.size()) {
              throw ConfigError("a detection probe must be the final step");
            }
            if (!basis.has_manifold(p.n_from)) {
              throw ConfigError(at + " references a manifold not in the basis");
            }
          } else if constexpr (std::is_same_v<T, dyn::OpticalPump422>) {
            if (p.repumper_overhang_us < 0.0) {
              throw ConfigError(at + ".repumper_overhang must be >= 0");
            }
          }
        },
        step.pulse);
  }
  if (spec.scan.values.empty()) {
    throw ConfigError("scan requires at least one value");
  }
  PathRef ref = parse_path(spec, spec.scan.path);
  if (ref.shared) {
    int flag = -1;
    for (const auto& s : spec.steps) {
      if (const auto* mw = std::get_if<dyn::MicrowavePulse>(&s.pulse)) {
        if (!mw->use_shared_source) continue;
        int tp = mw->two_photon ? 1 : 0;
        if (flag == -1) flag = tp;
        if (flag != tp) {
          throw ConfigError(
              "shared-source microwave pulses must agree on photon number");
        }
      }
    }
  }
  if (spec.shots_per_point < 0) {
    throw ConfigError("shots_per_point must be >= 0");
  }
  if (spec.jitter_sigma_kHz < 0.0) {
    throw ConfigError("jitter sigma must be >= 0");
  }
  if (spec.pump_leak_5s < 0.0 || spec.pump_loss_other < 0.0 ||
      spec.pump_leak_5s + spec.pump_loss_other > 1.0) {
    throw ConfigError("pump imperfection fractions must be >= 0 and sum <= 1");
  }
  std::optional<int> probe_label;
  if (!spec.steps.empty()) {
    if (const auto* pp =
            std::get_if<dyn::ProbePulse>(&spec.steps.back().pulse)) {
      probe_label = pp->n_to;
    }
  }
  auto channel_ok = [&](int n) {
    return basis.has_manifold(n) || (probe_label && *probe_label == n);
  };
  const Observable& obs = spec.observable;
  if (obs.kind == ObservableKind::channel ||
      obs.kind == ObservableKind::normalized) {
    if (!channel_ok(obs.channel_n)) {
      throw ConfigError("observable channel " + std::to_string(obs.channel_n) +
                        " is not a detection channel of this sequence");
    }
  }
  if (obs.kind == ObservableKind::normalized && !channel_ok(obs.partner_n)) {
    throw ConfigError("observable channel " + std::to_string(obs.partner_n) +
                      " is not a detection channel of this sequence");
  }
  if (obs.kind == ObservableKind::raman_ratio) {
    if (!spec.probe_mj32 || !spec.probe_mj12) {
      throw ConfigError(
          "raman_ratio observable needs both core-state selective probes");
    }
    if (!basis.has_manifold(spec.raman_transfer_channel)) {
      throw ConfigError("raman transfer channel is not in the basis");
    }
  }
}

SpectrumDataset run_sequence(const SequenceSpec& spec,
                             const ModelBundle& bundle,
                             std::uint64_t rng_seed) {
  validate_sequence(spec, bundle);
  auto basis = std::make_shared<dyn::Basis>(spec.basis_manifolds, bundle.shift,
                                            bundle.nu0, true);
  dyn::QuantumState initial = dyn::QuantumState::mixture(
      basis, spec.initial.components, spec.initial.bg_fraction);

  PathRef ref = parse_path(spec, spec.scan.path);
  bool source_scan = targets_mw_source(spec, ref);
  double mult = source_scan ? source_multiplier(spec, ref) : 1.0;
  bool jitter_on = spec.jitter_sigma_kHz > 0.0 && source_scan;
  int first_aff = first_affected_step(spec, ref);

  std::vector<std::pair<double, double>> nodes;
  if (jitter_on) {
    nodes = gauss_hermite_unit(21);
  } else {
    nodes = {{0.0, 1.0}};
  }

  ChainEvaluator ev{basis, &bundle, spec.pump_leak_5s, spec.pump_loss_other,
                    {}};

  dyn::QuantumState prefix = initial;
  double prefix_clock = 0.0;
  std::optional<dyn::ProbePulse> prefix_probe;
  for (int k = 0; k < first_aff; ++k) {
    ev.apply_step(prefix, prefix_clock, spec.steps[k], prefix_probe);
  }

  const Observable& obs = spec.observable;
  const int npts = static_cast<int>(spec.scan.values.size());
  const int shots = spec.shots_per_point;
  std::uint64_t id_key = fnv1a64(spec.id);

  SpectrumDataset ds;
  ds.sequence_id = spec.id;
  ds.axis_name = spec.scan.path.empty() ? "point" : spec.scan.path;
  ds.axis_unit = axis_unit_for(ref);
  ds.observable_name = obs.name();
  ds.axis = spec.scan.values;
  if (source_scan) {
    ds.axis2_name = "effective_freq_GHz";
    for (double v : ds.axis) ds.axis2.push_back(mult * v);
  }

  for (int i = 0; i < npts; ++i) {
    std::map<int, double> chan;
    double acc_32 = 0.0, acc_12 = 0.0;
    for (const auto& [offset_scale, weight] : nodes) {
      std::vector<dyn::Step> steps = spec.steps;
      if (!ref.none) {
        double v = spec.scan.values[i];
        if (jitter_on) {
          v += spec.jitter_sigma_kHz * offset_scale / mult * 1e-6;
        }
        apply_scan_value(steps, spec.scan.path, v);
      }
      dyn::QuantumState st = prefix;
      double clock = prefix_clock;
      std::optional<dyn::ProbePulse> probe = prefix_probe;
      for (size_t k = static_cast<size_t>(first_aff); k < steps.size(); ++k) {
        ev.apply_step(st, clock, steps[k], probe);
      }
      if (obs.kind == ObservableKind::raman_ratio) {
        dyn::Step probe32{0.0, *spec.probe_mj32};
        dyn::Step probe12{0.0, *spec.probe_mj12};
        std::optional<dyn::ProbePulse> none;
        dyn::QuantumState s32 = st;
        double c32 = clock;
        ev.apply_step(s32, c32, probe32, none);
        acc_32 += weight * detect(s32, std::nullopt)
                               .channel_or_zero(spec.raman_transfer_channel);
        dyn::QuantumState s12 = st;
        double c12 = clock;
        ev.apply_step(s12, c12, probe12, none);
        acc_12 += weight * detect(s12, std::nullopt)
                               .channel_or_zero(spec.raman_transfer_channel);
      } else {
        DetectionRecord rec = detect(st, probe);
        for (const auto& [n, p] : rec.channel) chan[n] += weight * p;
      }
    }

    double value = 0.0, error = 0.0;
    switch (obs.kind) {
      case ObservableKind::channel: {
        double p = clamp01(chan[obs.channel_n]);
        if (shots > 0) {
          auto g = seeded_engine({rng_seed, id_key,
                                  static_cast<std::uint64_t>(i), 0});
          int k = sample_binomial(g, shots, p);
          value = static_cast<double>(k) / shots;
          error = binomial_se(k, shots);
        } else {
          value = p;
        }
        break;
      }
      case ObservableKind::normalized: {
        double pa = clamp01(chan[obs.channel_n]);
        double pb = clamp01(chan[obs.partner_n]);
        if (shots > 0) {
          auto g = seeded_engine({rng_seed, id_key,
                                  static_cast<std::uint64_t>(i), 0});
          int ka = sample_binomial(g, shots, pa);
          double pb_rest = pa < 1.0 ? clamp01(pb / (1.0 - pa)) : 0.0;
          int kb = sample_binomial(g, shots - ka, pb_rest);
          double a = static_cast<double>(ka) / shots;
          double b = static_cast<double>(kb) / shots;
          value = ratio_or_zero(a, a + b);
          error = ratio_se(a, b, binomial_se(ka, shots),
                           binomial_se(kb, shots));
        } else {
          value = ratio_or_zero(pa, pa + pb);
        }
        break;
      }
      case ObservableKind::raman_ratio: {
        double pa = clamp01(acc_32);
        double pb = clamp01(acc_12);
        if (shots > 0) {
          auto ga = seeded_engine({rng_seed, id_key,
                                   static_cast<std::uint64_t>(i), 0});
          auto gb = seeded_engine({rng_seed, id_key,
                                   static_cast<std::uint64_t>(i), 1});
          int ka = sample_binomial(ga, shots, pa);
          int kb = sample_binomial(gb, shots, pb);
          double a = static_cast<double>(ka) / shots;
          double b = static_cast<double>(kb) / shots;
          value = ratio_or_zero(b, a + b);
          error = ratio_se(b, a, binomial_se(kb, shots),
                           binomial_se(ka, shots));
        } else {
          value = ratio_or_zero(pb, pa + pb);
        }
        break;
      }
    }
    ds.value.push_back(value);
    ds.error.push_back(error);
  }

  nlohmann::ordered_json meta;
  meta["sequence_id"] = spec.id;
  meta["observable"] = obs.name();
  meta["shots_per_point"] = shots;
  if (shots > 0) meta["rng_seed"] = rng_seed;
  meta["jitter_sigma_kHz"] = spec.jitter_sigma_kHz;
  meta["jitter_applied"] = jitter_on;
  meta["basis_manifolds"] = spec.basis_manifolds;
  meta["bg_fraction"] = spec.initial.bg_fraction;
  meta["pump_leak_5s"] = spec.pump_leak_5s;
  meta["pump_loss_other"] = spec.pump_loss_other;
  meta["model"] = {{"mode", mode_name(bundle.shift.mode)},
                   {"theta", bundle.shift.theta},
                   {"B_kHz", bundle.shift.B_kHz},
                   {"dipole_C_kHz", bundle.shift.dipole_C_kHz},
                   {"reference_n", bundle.shift.reference_n}};
  meta["pump_rates"] = {{"gamma_p_MHz", bundle.pump.gamma_p_MHz},
                        {"drive_422_per_us", bundle.pump.drive_422_per_us},
                        {"drive_1092_per_us", bundle.pump.drive_1092_per_us}};
  ds.metadata = std::move(meta);
  return ds;
}

}  // namespace circsim::seq
