// heff: effective nonlinear dynamics of driven multi-level emitters coupled to
// quantized field modes.  Subcommands: dress, expand, effective, ensemble,
// validate, convert.  Exit codes: 0 ok, 1 validation tolerance miss, 2 config
// error, 3 physics-domain error, 4 internal-consistency failure.

#include <heff/heff.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace {

using namespace heff;
using nlohmann::json;

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError(path + ": cannot open for writing");
  f << text;
}

// --out dispatch; empty path means the stdout table already printed is all there is
void emit(const std::string& out, const json& j, const std::string& csv) {
  if (out.empty()) return;
  if (ends_with(out, ".json"))
    write_file(out, j.dump(2) + "\n");
  else if (ends_with(out, ".csv"))
    write_file(out, csv);
  else
    throw ConfigError(out + ": --out must end in .json or .csv");
}

std::string mono_string(const Monomial& mono) {
  std::string s;
  for (size_t m = 0; m < mono.size(); ++m) {
    for (int i = 0; i < mono[m].raise; ++i) s += " " + mode_name(int(m)) + "+";
    for (int i = 0; i < mono[m].lower; ++i) s += " " + mode_name(int(m));
  }
  return s.empty() ? "1" : s.substr(1);
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

json poly_json(const ModePolynomial& p) {
  json terms = json::array();
  for (const auto& [mono, c] : p.terms()) {
    json t;
    t["monomial"] = detail_cfg::monomial_to_json(mono);
    t["re"] = c.real();
    t["im"] = c.imag();
    terms.push_back(std::move(t));
  }
  return terms;
}

int run_dress(const SystemConfig& cfg, const std::string& out) {
  const CoupledSystem sys = cfg.build();
  const int d = sys.dim();
  std::printf("regime: %s\n", to_string(sys.regime));
  std::printf("%-4s %-8s %18s %18s %14s\n", "n", "label", "bare [rad/s]", "dressed [rad/s]",
              "shift [rad/s]");
  json j;
  j["regime"] = to_string(sys.regime);
  std::string csv = "level,label,bare_rad_s,dressed_rad_s,shift_rad_s\n";
  for (int n = 0; n < d; ++n) {
    const double bare = cfg.scheme.levels[size_t(n)].energy;
    const double dressed = sys.basis.energies(n);
    std::printf("%-4d %-8s %18.10g %18.10g %14.6g\n", n,
                cfg.scheme.levels[size_t(n)].label.c_str(), bare, dressed, dressed - bare);
    j["levels"].push_back({{"label", cfg.scheme.levels[size_t(n)].label},
                           {"bare_rad_s", bare},
                           {"dressed_rad_s", dressed}});
    csv += std::to_string(n) + "," + cfg.scheme.levels[size_t(n)].label + "," + fmt(bare) + "," +
           fmt(dressed) + "," + fmt(dressed - bare) + "\n";
  }
  std::printf("\nmodes:\n%-4s %-14s %18s %18s\n", "m", "transition", "rate [rad/s]",
              "omega [rad/s]");
  for (int m = 0; m < sys.n_modes(); ++m) {
    const ModeInfo& mi = sys.modes[size_t(m)];
    const std::string tname = size_t(mi.transition) < cfg.transition_names.size()
                                  ? cfg.transition_names[size_t(mi.transition)]
                                  : std::to_string(mi.transition);
    std::printf("%-4d %-14s %18.10g %18.10g\n", m, tname.c_str(), mi.rate, mi.omega);
    j["modes"].push_back({{"transition", tname}, {"rate_rad_s", mi.rate},
                          {"omega_rad_s", mi.omega}});
  }
  for (int n = 0; n < d; ++n) {
    json row = json::array();
    for (int k = 0; k < d; ++k)
      row.push_back({sys.basis.U(k, n).real(), sys.basis.U(k, n).imag()});
    j["U_columns"].push_back(std::move(row));
  }
  emit(out, j, csv);
  return 0;
}

int run_expand(const SystemConfig& cfg, const std::string& out, int order, bool closed,
               int level) {
  const CoupledSystem sys = cfg.build();
  std::map<MultiIndex, ModePolynomial> terms;
  if (closed) {
    if (order > 4)
      throw ConfigError("--closed covers total order <= 4; use --recursion for order " +
                        std::to_string(order));
    for (int t = 0; t <= order; ++t)
      for (const MultiIndex& J : indices_of_order(sys.n_modes(), t)) {
        ModePolynomial p = eigenvalue_coefficient_closed(J, sys, level);
        if (!p.is_zero()) terms.emplace(J, std::move(p));
      }
  } else {
    const ExpansionSeries series = expand_recursive(sys, level, order);
    for (const auto& [J, poly] : series.energy_terms())
      if (!poly.is_zero()) terms.emplace(J, poly);
  }

  std::printf("# unit-rate eigenvalue coefficients E_J for dressed level %d (%s)\n", level,
              closed ? "closed form" : "recursion");
  json j;
  j["level"] = level;
  j["order"] = order;
  j["method"] = closed ? "closed" : "recursion";
  j["terms"] = json::array();
  std::string csv = "index,monomial,re,im\n";
  for (const auto& [J, poly] : terms) {
    std::printf("E_%s = %s\n", index_string(J).c_str(), poly.to_string().c_str());
    json t;
    t["index"] = J;
    t["coefficient"] = poly_json(poly);
    j["terms"].push_back(std::move(t));
    for (const auto& [mono, c] : poly.terms())
      csv += quoted(index_string(J)) + "," + quoted(mono_string(mono)) + "," + fmt(c.real()) +
             "," + fmt(c.imag()) + "\n";
  }
  emit(out, j, csv);
  return 0;
}

int run_effective(const SystemConfig& cfg, const std::string& out, int order) {
  const CoupledSystem sys = cfg.build();
  const EffectiveModel model = compute_effective_model(sys, order);

  std::printf("regime: %s   modes: %d   expansion order: %d\n", to_string(model.regime),
              model.n_modes(), order);
  std::printf("\nfree field:  %s\n", model.free_field.to_string().c_str());
  std::printf("\ninduced terms (resonance-filtered):\n");
  std::printf("%-22s %-24s %16s %16s %10s\n", "archetype", "monomial", "re [rad/s]",
              "im [rad/s]", "order");
  std::string csv = "archetype,monomial,re,im,order\n";
  for (const auto& [mono, c] : model.induced.terms()) {
    const auto pv = model.provenance.find(mono);
    const std::string ord = pv == model.provenance.end() ? "" : index_string(pv->second);
    std::printf("%-22s %-24s %16.8e %16.8e %10s\n", archetype_name(mono).c_str(),
                mono_string(mono).c_str(), c.real(), c.imag(), ord.c_str());
    csv += quoted(archetype_name(mono)) + "," + quoted(mono_string(mono)) + "," + fmt(c.real()) +
           "," + fmt(c.imag()) + "," + quoted(ord) + "\n";
  }
  std::printf("\nlindblad channels:\n");
  if (model.channels.empty()) std::printf("(none)\n");
  for (const LindbladChannel& ch : model.channels) {
    std::printf("level %-8s gamma_eff = %16.8e   op = %s\n",
                cfg.scheme.levels[size_t(ch.level)].label.c_str(), ch.gamma_eff,
                ch.op.to_string().c_str());
  }
  emit(out, effective_model_to_json(model), csv);
  return 0;
}

int run_ensemble(const SystemConfig& cfg, const std::string& out, int n, int order) {
  const CoupledSystem sys = cfg.build();
  const int N = n > 0 ? n : cfg.ensemble_n;
  const ExpansionSeries coll = ensemble_expansion(sys, N, order);
  const ExpansionSeries single = expand_recursive(sys, 0, order);

  std::printf("# collective ground-manifold coefficients, N = %d\n", N);
  json j;
  j["N"] = N;
  j["order"] = order;
  j["terms"] = json::array();
  std::string csv = "index,monomial,re,im\n";
  for (const auto& [J, poly] : coll.energy_terms()) {
    if (poly.is_zero()) continue;
    std::printf("E_%s = %s\n", index_string(J).c_str(), poly.to_string().c_str());
    if (single.has_energy(J)) {
      ModePolynomial scaled = single.energy(J);
      scaled *= double(N);
      std::printf("   deviation from N x single emitter: %.3e\n",
                  max_coeff_distance(poly, scaled));
    }
    json t;
    t["index"] = J;
    t["coefficient"] = poly_json(poly);
    j["terms"].push_back(std::move(t));
    for (const auto& [mono, c] : poly.terms())
      csv += quoted(index_string(J)) + "," + quoted(mono_string(mono)) + "," + fmt(c.real()) +
             "," + fmt(c.imag()) + "\n";
  }

  const std::vector<double> photons(size_t(sys.n_modes()), double(std::max(cfg.n_probe, 1)));
  const std::vector<double> bounds = coupling_bounds(sys, N, photons);
  std::printf("\nperturbative coupling bounds (at %g probe photons):\n",
              photons.empty() ? 0.0 : photons[0]);
  for (int m = 0; m < sys.n_modes(); ++m) {
    std::printf("mode %d: rate %"
                ".6g of bound %.6g  (%s)\n",
                m, sys.modes[size_t(m)].rate, bounds[size_t(m)],
                sys.modes[size_t(m)].rate < bounds[size_t(m)] ? "inside" : "OUTSIDE");
    j["bounds_rad_s"].push_back(bounds[size_t(m)]);
  }
  emit(out, j, csv);
  return 0;
}

int run_validate_sweep(const SystemConfig& cfg, const std::string& out, int order) {
  const CoupledSystem sys = cfg.build();
  const int n_modes = sys.n_modes();
  if (n_modes == 0) throw ConfigError(cfg.source + ": validate needs at least one drive");

  std::vector<double> unit(static_cast<size_t>(n_modes));
  double rmax = 0.0;
  for (int m = 0; m < n_modes; ++m) rmax = std::max(rmax, sys.modes[size_t(m)].rate);
  if (!(rmax > 0.0)) throw ConfigError(cfg.source + ": validate needs a nonzero drive rate");
  for (int m = 0; m < n_modes; ++m) unit[size_t(m)] = sys.modes[size_t(m)].rate / rmax;

  double gap_min = std::numeric_limits<double>::infinity();
  for (int k = 1; k < sys.dim(); ++k)
    for (int l = 0; l < k; ++l)
      if (std::abs(sys.basis.gap(k, l)) > 0.0)
        gap_min = std::min(gap_min, std::abs(sys.basis.gap(k, l)));
  // fit one degree pair beyond the checked order so the next terms of the series land
  // in their own columns instead of contaminating c_4; 0.05*gap keeps eigensolver
  // noise (~eps/h^4 in c_4) below the tolerance
  double scale_max = 0.05 * gap_min;
  const int degree = 10, points = 11;

  const ExpansionSeries series = expand_recursive(sys, 0, order);
  Eigen::MatrixXd fitted, pred;
  size_t rows = 0;
  if (sys.regime == Regime::bare) {
    // Fock occupations label nothing here; track eigenvalues per quadrature node.
    // The perturbation at node x enters as s*x, so the grid shrinks by the
    // largest node magnitude to stay inside the same perturbative window.
    const double xmax = quadrature_nodes(cfg.cutoff).cwiseAbs().maxCoeff();
    scale_max /= std::max(1.0, xmax);
    const QuadratureSweepFit fit =
        quadrature_sweep_fit(sys, unit, cfg.cutoff, scale_max, points, degree);
    fitted = fit.coeffs;
    pred = tipt_node_predictions(series, unit, fit.nodes);
    rows = fit.nodes.size();
    std::printf("# oracle sweep: scale_max = %.6g rad/s, %d points, %zu quadrature nodes\n",
                scale_max, points, rows);
  } else {
    const FockTruncation trunc(std::vector<int>(size_t(n_modes), cfg.cutoff));
    const SweepFit fit = coupling_sweep_fit(sys.basis.energies, sys.interactions, unit, trunc,
                                            sys.regime, scale_max, points, degree, cfg.n_probe);
    fitted = fit.coeffs;
    pred = tipt_diagonal_predictions(series, unit, fit.occupations);
    rows = fit.occupations.size();
    std::printf("# oracle sweep: scale_max = %.6g rad/s, %d points, %zu probe occupations\n",
                scale_max, points, rows);
  }
  const double tol = 1e-5;
  double pscale = 0.0;
  for (int t = 2; t <= order; ++t)
    for (long r = 0; r < pred.rows(); ++r) pscale = std::max(pscale, std::abs(pred(r, t)));
  json rowsj = json::array();
  std::string csv = "order,max_rel_err\n";
  bool ok = true;
  for (int t = 2; t <= order; ++t) {
    double worst_rel = 0.0, worst_abs = 0.0;
    bool relative = false;
    for (long r = 0; r < pred.rows(); ++r) {
      // diagonal predictions may vanish identically at odd orders (parity /
      // photon-number conservation): those columns are checked absolutely
      const double denom = std::max(std::abs(pred(r, t)), 1e-9 * pscale);
      relative = relative || std::abs(pred(r, t)) > 1e-9 * pscale;
      worst_rel = std::max(worst_rel, std::abs(fitted(r, t) - pred(r, t)) / denom);
      worst_abs = std::max(worst_abs, std::abs(fitted(r, t) - pred(r, t)));
    }
    if (relative) {
      const bool pass = worst_rel <= tol;
      ok = ok && pass;
      std::printf("order %d: max relative error %.3e  [%s]\n", t, worst_rel,
                  pass ? "PASS" : "FAIL");
      rowsj.push_back({{"order", t}, {"max_rel_err", worst_rel}, {"pass", pass}});
      csv += std::to_string(t) + "," + fmt(worst_rel) + "\n";
    } else {
      const double res = pscale > 0.0 ? worst_abs / pscale : worst_abs;
      std::printf("order %d: predicted zero, fitted residual %.3e of leading order\n", t, res);
      rowsj.push_back({{"order", t}, {"residual", res}});
      csv += std::to_string(t) + "," + fmt(res) + "\n";
    }
  }

  json j;
  if (sys.regime != Regime::bare) {
    std::vector<double> rates(static_cast<size_t>(n_modes));
    for (int m = 0; m < n_modes; ++m) rates[size_t(m)] = unit[size_t(m)] * scale_max;
    const FockTruncation trunc(std::vector<int>(size_t(n_modes), cfg.cutoff));
    const double shift = cutoff_doubling_shift(sys.basis.energies, sys.interactions, rates,
                                               trunc, sys.regime, cfg.n_probe);
    std::printf("cutoff doubling shift: %.3e (relative)\n", shift);
    j["cutoff_doubling_shift"] = shift;
  }
  std::printf("%s (TIPT through order %d vs exact diagonalization, tolerance %g)\n",
              ok ? "VALIDATION PASS" : "VALIDATION FAIL", order, tol);

  j["orders"] = std::move(rowsj);
  j["pass"] = ok;
  emit(out, j, csv);
  return ok ? 0 : 1;
}

int run_validate_nscaling(const SystemConfig& cfg, const std::string& out, int n_override) {
  // detuning of the first quantized drive sets the scale of the lambda grid
  double delta = 0.0;
  for (const DriveSpec& d : cfg.drives) {
    if (d.kind != DriveKind::quantized) continue;
    const Transition& tr = cfg.scheme.transitions.at(size_t(d.transition));
    const double gap = cfg.scheme.levels[size_t(tr.upper)].energy -
                       cfg.scheme.levels[size_t(tr.lower)].energy;
    delta = std::abs(gap - resolved_frequency(cfg.scheme, d));
    break;
  }
  if (!(delta > 0.0))
    throw ConfigError(cfg.source + ": --nscaling needs a detuned quantized drive");

  const Eigen::VectorXd grid = cfg.sweep.set()
                                   ? log_grid(cfg.sweep.min, cfg.sweep.max, cfg.sweep.points)
                                   : log_grid(0.01 * delta, 0.3 * delta, 25);
  std::vector<int> Ns = {1};
  const int N = n_override > 0 ? n_override : cfg.ensemble_n;
  if (N != 1) Ns.push_back(N);

  std::string csv = "regime,N,lambda,error\n";
  json rows = json::array();
  for (int nn : Ns) {
    const ErrorCurve curve = nscaling_curve(cfg.regime, nn, delta, grid, cfg.n_probe);
    for (int i = 0; i < curve.lambda.size(); ++i) {
      if (!curve.valid[size_t(i)]) continue;
      csv += std::string(to_string(cfg.regime)) + "," + std::to_string(nn) + "," +
             fmt(curve.lambda(i)) + "," + fmt(curve.error_caption(i)) + "\n";
      rows.push_back({{"regime", to_string(cfg.regime)},
                      {"N", nn},
                      {"lambda", curve.lambda(i)},
                      {"error", curve.error_caption(i)}});
    }
  }
  if (out.empty()) std::fputs(csv.c_str(), stdout);
  json j;
  j["delta_rad_s"] = delta;
  j["rows"] = std::move(rows);
  emit(out, j, csv);
  return 0;
}

int run_convert(const SystemConfig& cfg, const std::string& out, int order) {
  if (!cfg.has_units) throw ConfigError(cfg.source + ": convert needs a units section");
  const RabiRates rr = rabi_from_beam(cfg.units);
  json j;
  std::string csv = "quantity,value,unit\n";
  auto line = [&](const char* name, double v, const char* unit) {
    std::printf("%-24s %20.10e %s\n", name, v, unit);
    j[name] = v;
    csv += std::string(name) + "," + fmt(v) + "," + unit + "\n";
  };
  line("omega_rabi", rr.omega_rabi, "rad/s");
  if (rr.g > 0.0) line("g", rr.g, "rad/s");

  double field = 0.0;
  if (cfg.units.power > 0.0 && cfg.units.area > 0.0) {
    const double intensity = cfg.units.power / cfg.units.area;
    field = amplitude_from_intensity(intensity);
    line("intensity", intensity, "W/m^2");
    line("field_amplitude", field, "V/m");
  }

  // susceptibilities of the induced terms, where dipoles are declared
  if (!cfg.drives.empty()) {
    const CoupledSystem sys = cfg.build();
    const EffectiveModel model = compute_effective_model(sys, order);
    std::vector<double> couplings(size_t(sys.n_modes())), dipoles(size_t(sys.n_modes()));
    for (int m = 0; m < sys.n_modes(); ++m) {
      couplings[size_t(m)] = sys.modes[size_t(m)].rate;
      dipoles[size_t(m)] =
          cfg.scheme.transitions.at(size_t(sys.modes[size_t(m)].transition)).dipole;
    }
    const double n_emitters = cfg.units.density > 0.0 && cfg.units.mode_volume > 0.0
                                  ? cfg.units.density * cfg.units.mode_volume
                                  : double(cfg.ensemble_n);
    bool header = false;
    for (const auto& [mono, c] : model.induced.terms()) {
      const auto pv = model.provenance.find(mono);
      if (pv == model.provenance.end()) continue;
      if (total_order(pv->second) < 2) continue;
      bool convertible = cfg.units.mode_volume > 0.0;
      for (int m = 0; m < sys.n_modes(); ++m)
        if (pv->second[size_t(m)] > 0 && !(dipoles[size_t(m)] > 0.0)) convertible = false;
      if (!convertible) continue;
      const double chi =
          n_emitters *
          chi3_from_kerr(c.real(), pv->second, couplings, dipoles, cfg.units.mode_volume);
      if (!header) {
        std::printf("\nsusceptibilities (n_emitters = %g):\n", n_emitters);
        header = true;
      }
      const int tord = total_order(pv->second);
      // two dipole substitutions give chi(1) (dimensionless), four give chi(3)
      const char* unit = tord == 2 ? "(chi1)" : tord == 4 ? "m^2/V^2 (chi3)" : "SI";
      std::printf("%-22s %-20s rate %16.8e rad/s   chi %16.8e %s",
                  archetype_name(mono).c_str(), mono_string(mono).c_str(), c.real(), chi, unit);
      csv += quoted(archetype_name(mono)) + "," + fmt(chi) + "," + unit + "\n";
      json term;
      term["monomial"] = detail_cfg::monomial_to_json(mono);
      term["archetype"] = archetype_name(mono);
      term["rate_rad_s"] = c.real();
      term["chi_si"] = chi;
      term["chi_order"] = tord;
      if (field > 0.0 && tord == 4) {
        const double nr = refractive_index(chi, field);
        std::printf("   n_r %.12g", nr);
        term["n_r"] = nr;
      }
      std::printf("\n");
      j["susceptibilities"].push_back(std::move(term));
    }
  }
  emit(out, j, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"effective nonlinear Hamiltonians and master equations for driven emitters"};
  app.require_subcommand(1);

  std::string config_path, out;
  int order = 4;
  int level = 0;
  int n = 0;
  bool closed = false, recursion = false, nscaling = false;

  auto common = [&](CLI::App* s) {
    s->add_option("config", config_path, "config file (structured text or JSON)")->required();
    s->add_option("--out", out, "write machine-readable output (.csv or .json)");
  };

  CLI::App* dress = app.add_subcommand("dress", "dressed emitter levels and mode table");
  common(dress);

  CLI::App* expand = app.add_subcommand("expand", "eigenvalue coefficients E_J");
  common(expand);
  expand->add_option("--order", order, "max total order (default 4)");
  expand->add_option("--level", level, "dressed level (default 0)");
  CLI::Option* oc = expand->add_flag("--closed", closed, "Table-1 closed forms (order <= 4)");
  expand->add_flag("--recursion", recursion, "TIPT recursion (default)")->excludes(oc);

  CLI::App* effective = app.add_subcommand("effective", "effective Hamiltonian + Lindblad form");
  common(effective);
  effective->add_option("--order", order, "expansion order (default 4)");

  CLI::App* ensemble = app.add_subcommand("ensemble", "collective N-emitter coefficients");
  common(ensemble);
  ensemble->add_option("--n", n, "ensemble size (default: config value)");
  ensemble->add_option("--order", order, "expansion order (default 4, max 4)");

  CLI::App* validate = app.add_subcommand("validate", "TIPT vs exact-diagonalization oracle");
  common(validate);
  validate->add_option("--order", order, "expansion order to check (default 4)");
  validate->add_option("--n", n, "ensemble size for --nscaling");
  validate->add_flag("--nscaling", nscaling, "emit N-scaling error curves (CSV)");

  CLI::App* convert = app.add_subcommand("convert", "laboratory units: Rabi rates, chi3, n_r");
  common(convert);
  convert->add_option("--order", order, "expansion order (default 4)");

  try {
    app.parse(argc, argv);
    const SystemConfig cfg = load_config(config_path);
    if (*dress) return run_dress(cfg, out);
    if (*expand) return run_expand(cfg, out, order, closed, level);
    if (*effective) return run_effective(cfg, out, order);
    if (*ensemble) return run_ensemble(cfg, out, n, order);
    if (*validate)
      return nscaling ? run_validate_nscaling(cfg, out, n) : run_validate_sweep(cfg, out, order);
    if (*convert) return run_convert(cfg, out, order);
    return 4;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const PhysicsError& e) {
    std::fprintf(stderr, "physics error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
}
