#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>

#include "rns/antidiv.hpp"
#include "rns/convex.hpp"
#include "rns/geometry.hpp"
#include "rns/io.hpp"
#include "rns/mikado.hpp"
#include "rns/noise.hpp"
#include "rns/profiles.hpp"
#include "rns/uniqueness.hpp"

using namespace rns;

namespace {

struct Outcome {
  std::vector<Check> checks;
  std::vector<std::string> outputs;
};

Check check_le(const std::string& name, double value, double tol) { return {name, value, tol, value <= tol}; }

std::string path_in(const std::string& dir, const std::string& name) { return (std::filesystem::path(dir) / name).string(); }

Field random_solenoidal_or_not(const Grid& g, int rank, int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Phys p(g.d, g.N, rank);
  for (auto& c : p.v)
    for (auto& x : c) x = n01(rng);
  return truncate_box(from_phys(p, g.N), K);
}

NoiseSpectrum noise_from(const Config& c, int d, double amp_def, int K_def) {
  NoiseSpectrum s;
  s.d = d;
  s.K = static_cast<int>(c.integer("noise_K", K_def));
  s.beta = c.num("noise_beta", default_beta(d));
  s.amp = c.num("noise_amp", amp_def);
  return s;
}

StepParams desk_params(const Config& c, int d) {
  StepParams p;
  p.d = d;
  p.nu = c.num("nu", 1.0);
  if (c.has("lambda")) {
    Overrides ov;
    ov.mu = c.num("mu", 0.0);
    ov.sigma = c.num("sigma", 0.0);
    ov.kappa = c.num("kappa", 0.0);
    ov.varsigma = c.num("varsigma", 0.0);
    ov.ell = c.num("ell", 0.0);
    p = schedule_params(0, c.num("lambda", 0.0), c.num("theta", 0.05), d, c.num("p", 1.0), c.num("r", 1.0), p.nu, ov);
  } else {
    p.mu = c.num("mu", 16);
    p.sigma = c.num("sigma", 4);
    p.varsigma = c.num("varsigma", 4);
    p.kappa = c.num("kappa", 64);
    p.ell = c.num("ell", 1.0 / 64);
    p.full_schedule = false;
  }
  return p;
}

Outcome geometry_check(const Config& c, const std::string& dir) {
  Outcome o;
  const int d = static_cast<int>(c.integer("d", 2));
  const int samples = static_cast<int>(c.integer("samples", 10000));
  const std::uint64_t seed = c.seed("seed", 1);
  Basis b = make_basis(d);
  const double err = decomposition_error(b, samples, seed);
  PositivityReport pos = certify_positivity(b, samples, seed);
  o.checks.push_back(check_le("reconstruction", err, c.num("tol", 1e-10)));
  o.checks.push_back({"positivity_sampled_min", pos.sampled_min, 0.0, pos.ok && pos.sampled_min > 0.0});
  if (b.affine()) o.checks.push_back({"positivity_analytic_min", pos.analytic_min, 0.0, pos.analytic_min > 0.0});
  write_basis_csv(b, path_in(dir, "geometry_basis.csv"));
  o.outputs.push_back("geometry_basis.csv");
  return o;
}

Outcome mikado_check(const Config& c, const std::string& dir) {
  Outcome o;
  const int d = static_cast<int>(c.integer("d", 2));
  const int N = static_cast<int>(c.integer("N", d == 2 ? 256 : 64));
  const double mu = c.num("mu", d == 2 ? 16 : 4);
  MikadoFamily fam = build_mikado(make_basis(d), mu, N, c.str("cache_dir", ""));
  MikadoReport r = check_mikado(fam);
  const double tol = c.num("tol", 1e-8);
  o.checks.push_back(check_le("div_W", r.div_W, tol));
  o.checks.push_back(check_le("div_WW", r.div_WW, tol));
  o.checks.push_back(check_le("div_V_minus_W", r.div_V_minus_W, tol));
  o.checks.push_back(check_le("gram", r.gram, 1e-10));
  o.checks.push_back(check_le("psi_norm", r.psi_norm, c.num("psi_tol", 1e-3)));
  o.checks.push_back(check_le("skew_V", r.skew_V, 1e-10));
  return o;
}

Outcome antidiv_check(const Config& c, const std::string& dir) {
  Outcome o;
  const int d = static_cast<int>(c.integer("d", 2));
  const int N = static_cast<int>(c.integer("N", d == 2 ? 64 : 32));
  const int cases = static_cast<int>(c.integer("cases", 100));
  const std::uint64_t seed = c.seed("seed", 1);
  const double tol = c.num("tol", 1e-10);
  Grid g{d, N};
  const int K = N / 4;
  std::ofstream csv(path_in(dir, "antidiv.csv"));
  csv.precision(12);
  csv << "case,div_R,trace_R,sym_R,R_lap,div_B\n";
  AntiDivReport worst;
  for (int i = 0; i < cases; ++i) {
    Field v = random_solenoidal_or_not(g, 1, K, seed * 7919 + 2 * i);
    Field M = trace_free(symmetrize(random_solenoidal_or_not(g, 2, K, seed * 7919 + 2 * i + 1)));
    for (int a = 0; a < M.ncomp(); ++a) M.comp(a)[0] = 0.0;
    AntiDivReport r = check_antidiv(v, M);
    csv << i << "," << r.div_R << "," << r.trace_R << "," << r.sym_R << "," << r.R_lap << "," << r.div_B << "\n";
    worst.div_R = std::max(worst.div_R, r.div_R);
    worst.trace_R = std::max(worst.trace_R, r.trace_R);
    worst.sym_R = std::max(worst.sym_R, r.sym_R);
    worst.R_lap = std::max(worst.R_lap, r.R_lap);
    worst.div_B = std::max(worst.div_B, r.div_B);
  }
  o.outputs.push_back("antidiv.csv");
  o.checks.push_back(check_le("div_R", worst.div_R, tol));
  o.checks.push_back(check_le("trace_R", worst.trace_R, tol));
  o.checks.push_back(check_le("sym_R", worst.sym_R, tol));
  o.checks.push_back(check_le("R_lap", worst.R_lap, tol));
  o.checks.push_back(check_le("div_B", worst.div_B, tol));
  return o;
}

Outcome profiles_check(const Config& c, const std::string& dir) {
  Outcome o;
  const double kappa = c.num("kappa", 8);
  const int varsigma = static_cast<int>(c.integer("varsigma", 2));
  const double dt = c.num("dt", 1.0 / 2048);
  const double T = c.num("T", 4);
  const double ell = c.num("ell", 1.0 / 64);
  SampledProfile s = build_g(kappa, varsigma, dt, T);
  TimeCutoff cut = build_cutoff(ell, dt);
  write_profiles_csv(path_in(dir, "profiles.csv"), s, cut);
  o.outputs.push_back("profiles.csv");
  std::vector<double> g2(s.g.size());
  for (std::size_t i = 0; i < g2.size(); ++i) g2[i] = s.g[i] * s.g[i];
  double werr = 0.0, hmax = 0.0;
  const int steps = static_cast<int>(std::lround(1.0 / dt));
  for (long w = 0; (w + steps) < static_cast<long>(g2.size()); w += steps / 4)
    werr = std::max(werr, std::abs(window_norm(g2, dt, w * dt, 1.0) - 1.0));
  for (double h : s.h) hmax = std::max(hmax, std::abs(h));
  o.checks.push_back(check_le("g_L2_window", werr, 1e-6));
  o.checks.push_back(check_le("h_sup", hmax, 1.0));
  return o;
}

Outcome noise_moments(const Config& c, const std::string& dir) {
  Outcome o;
  const int d = static_cast<int>(c.integer("d", 2));
  NoiseSpectrum s = noise_from(c, d, 1.0, 8);
  MomentTable t = estimate_convolution_moments(s, c.num("delta", 0.25), c.num("m", 2), static_cast<int>(c.integer("S", 4)),
                                               static_cast<int>(c.integer("samples", 1000)), c.num("dt", 1.0 / 64),
                                               c.seed("seed", 1), static_cast<int>(c.integer("nu", 1)),
                                               static_cast<int>(c.integer("workers", 1)));
  write_moments_csv(path_in(dir, "noise_moments.csv"), t);
  o.outputs.push_back("noise_moments.csv");
  o.checks.push_back(check_le("flatness", t.flatness, c.num("tol", 1.5)));
  return o;
}

Outcome residual(const Config& c, const std::string& dir) {
  Outcome o;
  const int d = static_cast<int>(c.integer("d", 2));
  const int N = static_cast<int>(c.integer("N", 128));
  const double dt = c.num("dt", 1.0 / 512), T = c.num("T", 9.0 / 32), nu = c.num("nu", 1.0);
  const std::string state = c.str("state", "zero");
  Grid g{d, N};
  const int frames = static_cast<int>(std::lround(T / dt)) + 1;
  IterationState st;
  Path z;
  if (state == "zero") {
    st.v.dt = st.R.dt = z.dt = dt;
    st.v.f.assign(frames, Field(g, 1));
    st.R.f.assign(frames, Field(g, 2));
    z.f.assign(frames, Field(g, 1));
  } else if (state == "toy") {
    z = sample_z_path(Field(g, 1), noise_from(c, d, 0.02, 4), T, dt, c.seed("seed", 1), static_cast<int>(nu));
    Path dw;
    Path w = default_w(g, dt, frames, c.num("w_amp", 0.05), &dw);
    st = initial_state(w, z, nu, dw);
    if (c.flag("step", false)) {
      StepGrid grid;
      grid.cache_dir = c.str("cache_dir", "");
      st = step(st, desk_params(c, d), z, grid).next;
    }
  } else {
    throw ConfigError("key 'state': expected zero or toy");
  }
  ResidualReport r = residual_certificate(st.v, st.R, z, nu);
  std::ofstream csv(path_in(dir, "residual.csv"));
  csv.precision(12);
  csv << "frame,residual\n";
  for (std::size_t i = 0; i < r.per_frame.size(); ++i) csv << i + 1 << "," << r.per_frame[i] << "\n";
  o.outputs.push_back("residual.csv");
  o.checks.push_back(check_le("relative_residual", r.relative, c.num("tol", 1e-5)));
  return o;
}

Outcome iterate(const Config& c, const std::string& dir) {
  Outcome o;
  CampaignConfig cc;
  cc.d = static_cast<int>(c.integer("d", 2));
  cc.N = static_cast<int>(c.integer("N", 128));
  cc.dt = c.num("dt", 1.0 / 512);
  cc.T = c.num("T", 9.0 / 32);
  cc.nu = c.num("nu", 1.0);
  cc.steps = static_cast<int>(c.integer("steps", 1));
  cc.samples = static_cast<int>(c.integer("samples", 1));
  cc.seed = c.seed("seed", 1);
  cc.noise = noise_from(c, cc.d, 0.02, 4);
  cc.w_amp = c.num("w_amp", 0.05);
  cc.params = desk_params(c, cc.d);
  cc.grid.cache_dir = c.str("cache_dir", "");
  cc.grid.B_a = static_cast<int>(c.integer("B_a", 0));
  cc.grid.B_W = static_cast<int>(c.integer("B_W", 0));
  cc.workers = static_cast<int>(c.integer("workers", 1));
  CampaignReport rep = run_campaign(cc);
  write_campaign_csv(path_in(dir, "campaign.csv"), rep);
  std::ofstream log(path_in(dir, "residual_log.csv"));
  log.precision(12);
  log << "q,relative_residual\n";
  const double tol = c.num("tol", 1e-5);
  for (std::size_t q = 0; q < rep.residuals.size(); ++q) {
    log << q << "," << rep.residuals[q] << "\n";
    o.checks.push_back(check_le("residual_q" + std::to_string(q), rep.residuals[q], tol));
  }
  o.outputs = {"campaign.csv", "residual_log.csv"};
  return o;
}

Outcome uniqueness(const Config& c, const std::string& dir) {
  Outcome o;
  const int d = static_cast<int>(c.integer("d", 2));
  const int N = static_cast<int>(c.integer("N", 64));
  const double dt = c.num("dt", 1e-3), T = c.num("T", 0.25), nu = c.num("nu", 1.0);
  const int samples = static_cast<int>(c.integer("samples", 50));
  const std::uint64_t seed = c.seed("seed", 1);
  Grid g{d, N};
  NoiseSpectrum s = noise_from(c, d, 0.5, 4);
  Field u0 = taylor_green(g, c.num("u0_amp", 1.0));
  EnergyLedger en = energy_check(
      galerkin_ensemble(u0, s, dt, T, seed, samples, nu, static_cast<int>(c.integer("workers", 1)), false));
  GalerkinRun a = galerkin_solve(u0, s, dt, T, seed, 0, nu);
  Field du = leray(random_solenoidal_or_not(g, 1, 4, seed + 17));
  du *= c.num("perturbation", 1e-6) / l2(du);
  GalerkinRun b = galerkin_solve(u0 + du, s, dt, T, seed, 0, nu);
  GapLedger gap = pathwise_gap(a, b);
  LpsReport lps = lps_monitor(a, kInf, kInf);
  std::vector<LedgerRow> rows = en.rows;
  for (auto& r : gap_rows(gap)) rows.push_back(r);
  rows.push_back({T, "lps_norm_inf_inf", lps.norm, 0.0, 0.0, !std::isfinite(lps.norm)});
  rows.push_back({T, "lps_modulus", lps.modulus, 0.0, 0.0, false});
  write_ledger_csv(path_in(dir, "uniqueness_ledger.csv"), rows);
  o.outputs.push_back("uniqueness_ledger.csv");
  o.checks.push_back({"energy_margin", en.worst_margin, 1.0, en.ok});
  o.checks.push_back({"gronwall_flags", static_cast<double>(gap.flagged.size()), 0.0, gap.ok});
  o.checks.push_back({"lps_finite", lps.norm, 0.0, std::isfinite(lps.norm)});
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale convex integration and uniqueness experiments"};
  app.require_subcommand(1);
  std::string config_file, out_dir;
  std::vector<std::string> sets;
  app.add_option("--config", config_file, "key=value configuration file");
  app.add_option("--out", out_dir, "output directory (default $RNS_OUT or .)");
  app.add_option("--set", sets, "extra key=value entries")->take_all();

  using Fn = std::function<Outcome(const Config&, const std::string&)>;
  const std::vector<std::pair<std::string, Fn>> commands = {
      {"geometry-check", geometry_check}, {"mikado-check", mikado_check}, {"antidiv-check", antidiv_check},
      {"profiles-check", profiles_check}, {"noise-moments", noise_moments}, {"residual", residual},
      {"iterate", iterate},               {"uniqueness", uniqueness}};
  const std::vector<std::string> keys = {"d",       "N",     "dt",     "T",     "nu",     "seed",     "samples",
                                         "steps",   "workers", "mu",   "sigma", "kappa",  "varsigma", "ell",
                                         "lambda",  "theta", "state",  "tol",   "cases",  "cache_dir"};
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    subs[name] = sub;
    for (const auto& k : keys) sub->add_option("--" + k, flags[name][k]);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    Config cfg = config_file.empty() ? Config() : Config::load(config_file);
    for (const auto& s : sets) {
      Config one = Config::parse(s);
      for (const auto& [k, v] : one.items()) cfg.set(k, v);
    }
    for (const auto& [name, fn] : commands) {
      if (!subs[name]->parsed()) continue;
      for (const auto& [k, v] : flags[name])
        if (!v.empty()) cfg.set(k, v);
      const std::string dir = output_root(out_dir);
      std::filesystem::create_directories(dir);
      Outcome o = fn(cfg, dir);
      const std::string checks = name + "_checks.csv";
      write_checks_csv(path_in(dir, checks), o.checks);
      o.outputs.push_back(checks);
      write_manifest(path_in(dir, name + "_manifest.json"), name, cfg, cfg.seed("seed", 1), o.outputs, o.checks);
      bool ok = true;
      for (const auto& c : o.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value << " (tolerance " << c.tolerance
                  << ")\n";
        ok = ok && c.pass;
      }
      return ok ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
