// Command-line laboratory for perpetuity sequences driven by nonnegative
// random matrices: spectral calibration, passage-time simulation, asymptotic
// predictions, and theorem-by-theorem verification.
//
// Exit codes: 0 pass/warn, 1 verification fail, 2 input error, 3 domain error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "mfpt/asymptotics.hpp"
#include "mfpt/oracle.hpp"
#include "mfpt/simulate.hpp"
#include "mfpt/verify.hpp"

namespace {

using mfpt::ordered_json;

constexpr const char* kToolVersion = "1.0.0";

int default_workers() {
  if (const char* env = std::getenv("PERPLAB_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw mfpt::DomainError("cannot open output file " + path);
  out << text << "\n";
}

mfpt::Vec parse_direction(const std::vector<double>& entries, int d) {
  if (static_cast<int>(entries.size()) != d)
    throw CLI::ValidationError("--y", "expected " + std::to_string(d) +
                                          " components");
  mfpt::Vec y(d);
  for (int i = 0; i < d; ++i) y[i] = entries[static_cast<std::size_t>(i)];
  if ((y.array() < 0.0).any() || y.sum() <= 0.0)
    throw CLI::ValidationError("--y", "direction must be nonnegative, nonzero");
  return y;
}

ordered_json manifest_json(const mfpt::Law& law, const std::string& law_path,
                           const std::string& subcommand,
                           const ordered_json& params, std::uint64_t seed,
                           int workers) {
  ordered_json m;
  m["law_path"] = law_path;
  m["law_hash"] = law.hash();
  m["subcommand"] = subcommand;
  m["params"] = params;
  m["seed"] = seed;
  m["workers"] = workers;
  m["tool_version"] = kToolVersion;
  m["timestamp"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  return m;
}

int cmd_spectral(const std::string& law_path, std::vector<double> s_grid,
                 const std::string& out_path) {
  mfpt::Law law = mfpt::Law::load(law_path);
  mfpt::RateModel model(law);
  if (s_grid.empty()) s_grid = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  ordered_json j;
  j["law_hash"] = law.hash();
  j["table"] = ordered_json::array();
  for (double s : s_grid) {
    ordered_json row;
    row["s"] = s;
    if (s == 0.0) {
      row["kappa"] = 1.0;
      row["lambda"] = 0.0;
      auto d = model.lambda_derivs(0.012, 2);
      row["d1"] = d[1];
      row["d2"] = d[2];
      row["residual"] = 0.0;
    } else {
      const mfpt::SpectralSolution& sol = model.solve(s);
      auto d = model.lambda_derivs(s, 2);
      row["kappa"] = sol.kappa;
      row["lambda"] = std::log(sol.kappa);
      row["d1"] = d[1];
      row["d2"] = d[2];
      row["residual"] = sol.residual;
    }
    j["table"].push_back(row);
  }
  model.calibrate();
  j["alpha"] = model.alpha();
  j["rho"] = model.rho();
  j["sigma_alpha"] = model.sigma_alpha();
  write_text(out_path, j.dump(2));
  return 0;
}

int cmd_simulate(const std::string& law_path, double u, int samples,
                 long long max_steps, double tilt_s,
                 const std::vector<double>& y_entries, std::uint64_t seed,
                 int workers, const std::string& out_path,
                 const std::string& manifest_path) {
  mfpt::Law law = mfpt::Law::load(law_path);
  if (u <= 0.0) throw mfpt::DomainError("u must be positive");
  mfpt::Vec y;
  const mfpt::Vec* yp = nullptr;
  if (!y_entries.empty()) {
    y = parse_direction(y_entries, law.d());
    yp = &y;
  }
  mfpt::RateModel model(law);
  if (max_steps <= 0) {
    try {
      model.calibrate();
      max_steps = mfpt::default_max_steps(u, model.rho());
    } catch (const mfpt::DomainError&) {
      max_steps = 1000000;
    }
  }
  const mfpt::SpectralSolution* sol = nullptr;
  if (tilt_s > 0.0) sol = &model.solve(tilt_s);

  std::vector<mfpt::PassageSample> rows(static_cast<std::size_t>(samples));
  mfpt::parallel_for(samples, workers, [&](long long rep) {
    auto stream = static_cast<std::uint64_t>(rep);
    rows[static_cast<std::size_t>(rep)] =
        tilt_s > 0.0
            ? mfpt::simulate_tau_tilted(law, u, tilt_s, *sol, max_steps, seed,
                                        stream, yp)
            : mfpt::simulate_tau(law, u, max_steps, seed, stream, yp);
  });

  std::ostringstream csv;
  csv << "replicate,tau,censored,weight,overshoot";
  for (int i = 0; i < law.d(); ++i) csv << ",dir" << i;
  csv << "\n";
  csv.precision(17);
  int censored = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    censored += r.censored();
    csv << i << "," << r.tau << "," << (r.censored() ? 1 : 0) << ","
        << r.weight() << "," << r.overshoot;
    for (int k = 0; k < law.d(); ++k) csv << "," << r.direction[k];
    csv << "\n";
  }
  write_text(out_path, csv.str());

  ordered_json params = {{"u", u},
                         {"samples", samples},
                         {"max_steps", max_steps},
                         {"tilt_s", tilt_s},
                         {"directional", yp != nullptr}};
  ordered_json manifest =
      manifest_json(law, law_path, "simulate", params, seed, workers);
  manifest["censored"] = censored;
  if (!manifest_path.empty()) write_text(manifest_path, manifest.dump(2));
  if (censored == samples)
    std::cerr << "warning: all " << samples
              << " replicates censored at max_steps=" << max_steps << "\n";
  return 0;
}

int cmd_predict(const std::string& law_path, double u, double beta, double l,
                double a, int m, const std::vector<double>& y_entries,
                const std::string& variant, const std::string& out_path) {
  mfpt::Law law = mfpt::Law::load(law_path);
  mfpt::RateModel model(law);
  model.calibrate();
  if (beta >= model.rho())
    throw mfpt::DomainError("outside lower-deviation regime: beta >= rho");
  mfpt::Vec y;
  const mfpt::Vec* yp = nullptr;
  if (!y_entries.empty()) {
    y = parse_direction(y_entries, law.d());
    yp = &y;
  }
  mfpt::RatePoint pt = mfpt::rate_I(model, beta);
  mfpt::PrefactorEstimate pf = mfpt::prefactor_varkappa(model, pt.s);
  mfpt::LDPrediction pred;
  if (variant == "cumulative" || variant == "directional")
    pred = mfpt::predict_ld(model, pf, u, beta, l, yp);
  else if (variant == "local")
    pred = mfpt::predict_local(model, pf, u, beta, l, a, m, yp);
  else if (variant == "pointwise")
    pred = mfpt::predict_pointwise(model, pf, u, beta, yp);
  else
    throw CLI::ValidationError("--variant",
                               "expected cumulative|local|pointwise|directional");

  ordered_json j;
  j["inputs"] = {{"law_hash", law.hash()}, {"u", u},       {"beta", beta},
                 {"l", l},                 {"a", a},       {"m", m},
                 {"variant", variant},     {"directional", yp != nullptr}};
  j["chi"] = pred.chi;
  j["C"] = pred.C;
  j["value"] = pred.value;
  j["rate_point"] = {{"beta", pt.beta}, {"s", pt.s}, {"I", pt.I},
                     {"I_prime", pt.I_prime}};
  write_text(out_path, j.dump(2));
  return 0;
}

int cmd_verify(const std::string& law_path, const std::string& theorem,
               std::vector<double> u_grid, int samples, std::uint64_t seed,
               int workers, const std::string& out_path) {
  mfpt::Law law = mfpt::Law::load(law_path);
  mfpt::RateModel model(law);
  std::vector<mfpt::VerificationReport> reports;
  auto want = [&](const std::string& t) {
    return theorem == "all" || theorem == t;
  };

  if (want("kesten")) {
    std::vector<double> grid = u_grid;
    if (grid.empty())
      grid = {std::exp(2.0), std::exp(3.0), std::exp(4.0), std::exp(5.0),
              std::exp(6.0)};
    reports.push_back(
        mfpt::check_kesten(law, model, grid, samples, seed, workers));
  }
  if (want("lln")) {
    std::vector<double> grid = u_grid;
    if (grid.empty()) grid = {std::exp(6.0), std::exp(10.0), std::exp(14.0)};
    reports.push_back(
        mfpt::check_lln(law, model, grid, samples, seed, 0.0, workers));
  }
  if (want("clt")) {
    std::vector<double> grid = u_grid;
    if (grid.empty()) grid = {std::exp(8.0), std::exp(12.0), std::exp(16.0)};
    reports.push_back(
        mfpt::check_clt(law, model, grid, samples, seed, workers));
  }
  if (want("ld")) {
    model.calibrate();
    double beta = 0.5 * model.rho();
    mfpt::RatePoint pt = mfpt::rate_I(model, beta);
    mfpt::PrefactorEstimate pf = mfpt::prefactor_varkappa(model, pt.s);
    std::vector<double> grid = u_grid;
    if (grid.empty()) grid = {std::exp(10.0), std::exp(20.0), std::exp(30.0)};
    reports.push_back(mfpt::check_ld(law, model, pf, beta, {0.0}, grid,
                                     samples, seed, workers));
  }
  if (want("local")) {
    model.calibrate();
    double beta = 0.5 * model.rho();
    mfpt::RatePoint pt = mfpt::rate_I(model, beta);
    mfpt::PrefactorEstimate pf = mfpt::prefactor_varkappa(model, pt.s);
    reports.push_back(
        mfpt::check_local(law, model, pf, beta, {8, 12, 16, 20}));
  }
  if (want("matrixld")) {
    model.calibrate();
    double q = model.lambda_prime(model.alpha());
    mfpt::Vec x = mfpt::Vec::Constant(law.d(), 1.0 / law.d());
    reports.push_back(
        mfpt::check_matrix_ld(law, model, {8, 12, 16}, q, x));
  }
  if (reports.empty())
    throw CLI::ValidationError(
        "--theorem", "expected kesten|lln|clt|ld|local|matrixld|all");

  ordered_json j;
  j["law_path"] = law_path;
  j["law_hash"] = law.hash();
  j["seed"] = seed;
  j["theorem"] = theorem;
  j["reports"] = ordered_json::array();
  bool any_fail = false;
  for (const auto& r : reports) {
    j["reports"].push_back(r.to_json());
    any_fail = any_fail || r.failed();
    std::cerr << r.theorem << ": " << r.verdict << "\n";
  }
  j["verdict"] = any_fail ? "fail" : "pass";
  write_text(out_path, j.dump(2));
  return any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for multivariate perpetuity sequences"};
  app.require_subcommand(1);

  std::string law_path, out_path, manifest_path, theorem = "all";
  std::string variant = "cumulative";
  std::vector<double> s_grid, u_grid, y_entries;
  double u = 0.0, beta = 0.0, l = 0.0, a = -1.0, tilt_s = 0.0;
  int m = 1, samples = 20000, workers = default_workers();
  long long max_steps = 0;
  std::uint64_t seed = 1;

  auto* sp = app.add_subcommand("spectral", "Pressure function and tail index");
  sp->add_option("--law", law_path)->required();
  sp->add_option("--s-grid", s_grid);
  sp->add_option("--out", out_path);

  auto* sim = app.add_subcommand("simulate", "Passage-time sampling");
  sim->add_option("--law", law_path)->required();
  sim->add_option("--u", u)->required();
  sim->add_option("--samples", samples);
  sim->add_option("--max-steps", max_steps);
  sim->add_option("--tilt-s", tilt_s);
  sim->add_option("--y", y_entries);
  sim->add_option("--seed", seed);
  sim->add_option("--workers", workers);
  sim->add_option("--out", out_path);
  sim->add_option("--manifest", manifest_path);

  auto* pr = app.add_subcommand("predict", "Asymptotic passage predictions");
  pr->add_option("--law", law_path)->required();
  pr->add_option("--u", u)->required();
  pr->add_option("--beta", beta)->required();
  pr->add_option("--l", l);
  pr->add_option("--a", a);
  pr->add_option("--m", m);
  pr->add_option("--y", y_entries);
  pr->add_option("--variant", variant);
  pr->add_option("--out", out_path);

  auto* vf = app.add_subcommand("verify", "Check theorems against estimates");
  vf->add_option("--law", law_path)->required();
  vf->add_option("--theorem", theorem);
  vf->add_option("--u-grid", u_grid);
  vf->add_option("--samples", samples);
  vf->add_option("--seed", seed);
  vf->add_option("--workers", workers);
  vf->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sp->parsed()) return cmd_spectral(law_path, s_grid, out_path);
    if (sim->parsed())
      return cmd_simulate(law_path, u, samples, max_steps, tilt_s, y_entries,
                          seed, workers, out_path, manifest_path);
    if (pr->parsed())
      return cmd_predict(law_path, u, beta, l, a, m, y_entries, variant,
                         out_path);
    if (vf->parsed())
      return cmd_verify(law_path, theorem, u_grid, samples, seed, workers,
                        out_path);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mfpt::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
