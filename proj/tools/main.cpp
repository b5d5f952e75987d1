// Command-line front end: computes transition rates, fixation probabilities
// (exact, Monte Carlo, first-order), sensitivity tables, the stationary size
// law, substitution rates, extinction-vortex curves, and runs the stochastic
// simulators and the built-in verification suite. All outputs are CSV or
// single `name = value` lines; seeded commands are byte-reproducible.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vortex/csv.hpp"
#include "vortex/dirichlet.hpp"
#include "vortex/errors.hpp"
#include "vortex/recurrence.hpp"
#include "vortex/simulate.hpp"
#include "vortex/stationary.hpp"
#include "vortex/substitution.hpp"
#include "vortex/verify.hpp"

namespace {

using namespace vortex;

struct DemographyFlags {
  double b = 1.0, d = 0.0, c = 1.0, delta = 0.0, delta_prime = 0.0;

  void attach(CLI::App* cmd, bool with_perturbations = true) {
    cmd->add_option("--b", b, "per-capita fecundity")->required();
    cmd->add_option("--d", d, "baseline natural death rate")->required();
    cmd->add_option("--c", c, "pairwise competition rate")->required();
    if (with_perturbations) {
      cmd->add_option("--delta", delta, "heterozygote death-rate increment");
      cmd->add_option("--delta-prime", delta_prime, "aa-homozygote death-rate increment");
    }
  }
  DemographicParams params() const { return {b, d, c, delta, delta_prime}; }
};

struct StateFlags {
  long long k = 0, m = 0, n = 0;
  void attach(CLI::App* cmd) {
    cmd->add_option("--k", k, "AA count")->required();
    cmd->add_option("--m", m, "Aa count")->required();
    cmd->add_option("--n", n, "aa count")->required();
  }
  PopulationState state() const { return {k, m, n}; }
};

// Inclusive start:stop:step grid; endpoints matched within half a step.
std::vector<double> parse_grid(const std::string& spec) {
  double start = 0, stop = 0, step = 0;
  const auto first = spec.find(':');
  const auto second = spec.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos)
    throw InvalidArgument("grid must be start:stop:step");
  try {
    start = std::stod(spec.substr(0, first));
    stop = std::stod(spec.substr(first + 1, second - first - 1));
    step = std::stod(spec.substr(second + 1));
  } catch (const std::exception&) {
    throw InvalidArgument("grid must be numeric start:stop:step");
  }
  if (!(step > 0.0) || !(stop >= start)) throw InvalidArgument("grid requires stop >= start, step > 0");
  std::vector<double> grid;
  for (double v = start; v <= stop + 0.5 * step; v += step) grid.push_back(v);
  return grid;
}

// Writes to the path, or stdout when the path is empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InvalidArgument("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diploid birth-death fixation and extinction-vortex toolkit"};
  app.require_subcommand(1);

  // rates ------------------------------------------------------------------
  auto* rates_cmd = app.add_subcommand("rates", "print the six transition rates of a state");
  DemographyFlags rates_demo;
  StateFlags rates_state;
  rates_demo.attach(rates_cmd);
  rates_state.attach(rates_cmd);

  // fixation -----------------------------------------------------------------
  auto* fix_cmd = app.add_subcommand("fixation", "fixation probability of allele a");
  DemographyFlags fix_demo;
  StateFlags fix_state;
  std::string fix_method = "exact";
  int fix_nmax = 80;
  std::uint64_t fix_reps = 100000, fix_seed = 1;
  int fix_threads = 1;
  std::string fix_out;
  fix_cmd->add_option("--method", fix_method, "exact | mc | first-order")
      ->check(CLI::IsMember({"exact", "mc", "first-order"}));
  fix_demo.attach(fix_cmd);
  fix_state.attach(fix_cmd);
  fix_cmd->add_option("--nmax", fix_nmax, "lattice truncation size");
  fix_cmd->add_option("--reps", fix_reps, "Monte Carlo replicates");
  fix_cmd->add_option("--seed", fix_seed, "Monte Carlo seed");
  fix_cmd->add_option("--threads", fix_threads, "Monte Carlo worker threads");
  fix_cmd->add_option("--out", fix_out, "dump the full table as CSV (exact method)");

  // derivatives ----------------------------------------------------------------
  auto* der_cmd = app.add_subcommand(
      "derivatives", "sensitivity tables x,y,x',y' of the fixation probability");
  DemographyFlags der_demo;
  int der_nmax = 60;
  double der_tol = 1e-10;
  std::string der_method = "auto", der_out, der_diag;
  der_demo.attach(der_cmd, false);
  der_cmd->add_option("--nmax", der_nmax, "largest population size tabulated");
  der_cmd->add_option("--tol", der_tol, "recurrence residual tolerance");
  der_cmd->add_option("--method", der_method, "auto | recurrence | dirichlet")
      ->check(CLI::IsMember({"auto", "recurrence", "dirichlet"}));
  der_cmd->add_option("--out", der_out, "tables CSV path (default stdout)");
  der_cmd->add_option("--diag", der_diag, "diagnostics CSV path");

  // stationary -------------------------------------------------------------
  auto* sta_cmd = app.add_subcommand("stationary", "stationary law of the population size");
  DemographyFlags sta_demo;
  double sta_tol = 1e-12;
  std::string sta_out;
  sta_demo.attach(sta_cmd, false);
  sta_cmd->add_option("--tol", sta_tol, "tail-mass tolerance");
  sta_cmd->add_option("--out", sta_out, "CSV path (default stdout)");

  // tau ------------------------------------------------------------------------
  auto* tau_cmd = app.add_subcommand("tau", "substitution (mutation-fixation) rate");
  DemographyFlags tau_demo;
  double tau_mu = 0.5, tau_tol = 1e-10;
  std::string tau_method = "exact";
  tau_demo.attach(tau_cmd);
  tau_cmd->add_option("--mu", tau_mu, "per-strand mutation intensity")->required();
  tau_cmd->add_option("--method", tau_method, "exact | linear")
      ->check(CLI::IsMember({"exact", "linear"}));
  tau_cmd->add_option("--tol", tau_tol, "series truncation tolerance");

  // vortex-curve ------------------------------------------------------------
  auto* vor_cmd = app.add_subcommand("vortex-curve", "mean fixation time T versus death rate d");
  double vor_b = 1.0, vor_c = 1.0, vor_delta = 0.0, vor_dp = 0.0, vor_mu = 1.0;
  double vor_tol = 1e-10;
  std::string vor_grid, vor_method = "exact", vor_out;
  vor_cmd->add_option("--b", vor_b, "per-capita fecundity")->required();
  vor_cmd->add_option("--c", vor_c, "pairwise competition rate")->required();
  vor_cmd->add_option("--delta", vor_delta, "heterozygote death-rate increment");
  vor_cmd->add_option("--delta-prime", vor_dp, "aa-homozygote death-rate increment");
  vor_cmd->add_option("--mu", vor_mu, "per-strand mutation intensity");
  vor_cmd->add_option("--d-grid", vor_grid, "start:stop:step, inclusive")->required();
  vor_cmd->add_option("--method", vor_method, "exact | linear")
      ->check(CLI::IsMember({"exact", "linear"}));
  vor_cmd->add_option("--tol", vor_tol, "series truncation tolerance");
  vor_cmd->add_option("--out", vor_out, "CSV path (default stdout)");

  // simulate -----------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "one exact-event trajectory to absorption");
  DemographyFlags sim_demo;
  StateFlags sim_state;
  std::uint64_t sim_seed = 1, sim_stream = 0, sim_cap = 100000000ULL;
  std::string sim_out;
  sim_demo.attach(sim_cmd);
  sim_state.attach(sim_cmd);
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--stream", sim_stream, "RNG stream id (replicate index)");
  sim_cmd->add_option("--event-cap", sim_cap, "censoring cap on event count");
  sim_cmd->add_option("--out", sim_out, "event-log CSV path (default stdout)");

  // meltdown ------------------------------------------------------------------
  auto* mel_cmd = app.add_subcommand("meltdown", "substitution-process trajectory");
  double mel_d0 = 0.5, mel_b = 1.0, mel_c = 1.0, mel_delta = 0.0, mel_dp = 0.1, mel_mu = 1.0;
  double mel_tol = 1e-10;
  int mel_nfix = 5;
  std::uint64_t mel_seed = 1;
  std::string mel_method = "linear", mel_out;
  mel_cmd->add_option("--d0", mel_d0, "initial natural death rate")->required();
  mel_cmd->add_option("--b", mel_b, "per-capita fecundity")->required();
  mel_cmd->add_option("--c", mel_c, "pairwise competition rate")->required();
  mel_cmd->add_option("--delta", mel_delta, "heterozygote death-rate increment");
  mel_cmd->add_option("--delta-prime", mel_dp, "aa-homozygote death-rate increment")->required();
  mel_cmd->add_option("--mu", mel_mu, "per-strand mutation intensity");
  mel_cmd->add_option("--n-fixations", mel_nfix, "number of successive fixations");
  mel_cmd->add_option("--seed", mel_seed, "RNG seed");
  mel_cmd->add_option("--method", mel_method, "exact | linear")
      ->check(CLI::IsMember({"exact", "linear"}));
  mel_cmd->add_option("--tol", mel_tol, "series truncation tolerance");
  mel_cmd->add_option("--out", mel_out, "CSV path (default stdout)");

  // micro ----------------------------------------------------------------------
  auto* mic_cmd = app.add_subcommand("micro", "microscopic per-strand mutation simulator");
  long long mic_init = 3;
  double mic_b = 2.0, mic_d0 = 1.0, mic_c = 0.5, mic_delta = 0.0, mic_dp = 0.1, mic_mu = 1.0;
  double mic_K = 10.0, mic_tend = 1000.0;
  std::uint64_t mic_seed = 1;
  std::string mic_out, mic_hist;
  mic_cmd->add_option("--initial-size", mic_init, "initial population size");
  mic_cmd->add_option("--b", mic_b, "per-capita fecundity")->required();
  mic_cmd->add_option("--d0", mic_d0, "mutation-free natural death rate")->required();
  mic_cmd->add_option("--c", mic_c, "pairwise competition rate")->required();
  mic_cmd->add_option("--delta", mic_delta, "heterozygous-locus death increment");
  mic_cmd->add_option("--delta-prime", mic_dp, "homozygous-locus death increment");
  mic_cmd->add_option("--mu", mic_mu, "per-strand mutation intensity");
  mic_cmd->add_option("--K", mic_K, "rare-mutation scaling (per-strand rate mu/K)");
  mic_cmd->add_option("--seed", mic_seed, "RNG seed");
  mic_cmd->add_option("--t-end", mic_tend, "model time horizon");
  mic_cmd->add_option("--out", mic_out, "event-log CSV path");
  mic_cmd->add_option("--size-hist", mic_hist, "time-weighted size occupancy CSV path");

  // verify ----------------------------------------------------------------------
  auto* ver_cmd = app.add_subcommand("verify", "run the built-in verification suite");
  int ver_only = -1;
  ver_cmd->add_option("--only", ver_only, "run a single criterion by number");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: validation: " << e.what() << std::endl;
    return 1;
  }

  try {
    if (rates_cmd->parsed()) {
      const TransitionSet ts =
          transitions(rates_state.state(), GeneralRates::uniform(rates_demo.params()));
      std::cout << "event,k,m,n,rate\n";
      for (const Transition& t : ts)
        std::cout << event_name(t.event) << ',' << t.k << ',' << t.m << ',' << t.n << ','
                  << csv::num(t.rate) << '\n';
    } else if (fix_cmd->parsed()) {
      const DemographicParams p = fix_demo.params();
      const PopulationState s = fix_state.state();
      if (fix_method == "exact") {
        const FixationTable table = solve_fixation(p, fix_nmax);
        std::cout << "u = " << csv::num(table.at(s)) << '\n';
        if (!fix_out.empty()) {
          Output out(fix_out);
          write_fixation_csv(out.stream(), table);
        }
      } else if (fix_method == "mc") {
        const McEstimate est = mc_fixation(s, p, fix_reps, fix_seed, fix_threads);
        std::cout << "u = " << csv::num(est.estimate) << '\n'
                  << "ci99_halfwidth = " << csv::num(est.ci_halfwidth_99) << '\n'
                  << "censored = " << est.censored << '\n';
      } else {
        const PerturbationTables tables = solve_tables(p, fix_nmax);
        const FirstOrderFixation fo = fixation_first_order(s, p, tables);
        std::cout << "u = " << csv::num(fo.clamped) << '\n'
                  << "u_raw = " << csv::num(fo.raw) << '\n';
      }
    } else if (der_cmd->parsed()) {
      RecurrenceOptions opts;
      opts.tol = der_tol;
      if (der_method == "recurrence") opts.allow_fallback = false;
      PerturbationTables tables;
      if (der_method == "dirichlet") {
        RecurrenceOptions forced = opts;
        forced.l_max = 1;  // unusable depth forces the Dirichlet extraction
        forced.allow_fallback = true;
        tables = solve_tables(der_demo.params(), der_nmax, forced);
      } else {
        tables = solve_tables(der_demo.params(), der_nmax, opts);
      }
      Output out(der_out);
      write_tables_csv(out.stream(), tables);
      if (!der_diag.empty()) {
        Output diag(der_diag);
        write_diagnostics_csv(diag.stream(), tables);
      }
      std::cerr << "method: "
                << (tables.method == TableMethod::Recurrence ? "recurrence" : "dirichlet")
                << ", s2 = " << csv::num(tables.s2) << std::endl;
    } else if (sta_cmd->parsed()) {
      const DemographicParams p = sta_demo.params();
      const StationaryLaw law = stationary_law(p.b, p.d, p.c, sta_tol);
      Output out(sta_out);
      write_stationary_csv(out.stream(), law);
      std::cerr << "mean size = " << csv::num(law.mean)
                << ", tail mass = " << csv::num(law.tail_mass) << std::endl;
    } else if (tau_cmd->parsed()) {
      const DemographicParams p = tau_demo.params();
      const SubstitutionRate r = tau_method == "exact" ? tau_exact(p, tau_mu, tau_tol)
                                                       : tau_linear(p, tau_mu, tau_tol);
      std::cout << "tau = " << csv::num(r.tau) << '\n' << "T = " << csv::num(r.T) << '\n';
    } else if (vor_cmd->parsed()) {
      const std::vector<double> grid = parse_grid(vor_grid);
      const VortexCurve curve =
          vortex_curve(grid, vor_b, vor_c, vor_delta, vor_dp, vor_mu,
                       vor_method == "exact" ? TauMethod::Exact : TauMethod::Linear, vor_tol);
      Output out(vor_out);
      write_vortex_csv(out.stream(), curve);
      std::cerr << "T strictly decreasing: " << (curve.t_strictly_decreasing ? "yes" : "no")
                << std::endl;
    } else if (sim_cmd->parsed()) {
      RngStream rng(sim_seed, sim_stream);
      std::vector<EventRecord> log;
      const AbsorptionOutcome res =
          run_to_absorption(sim_state.state(), sim_demo.params(), rng, sim_cap, &log);
      Output out(sim_out);
      write_event_log_csv(out.stream(), log);
      std::cerr << "absorbed_in = "
                << (res.absorbed_in == AbsorbedIn::Gammaa
                        ? "Gamma_a"
                        : res.absorbed_in == AbsorbedIn::GammaA ? "Gamma_A" : "censored")
                << ", events = " << res.events << ", time = " << csv::num(res.elapsed)
                << std::endl;
    } else if (mel_cmd->parsed()) {
      const MeltdownTrajectory t = simulate_meltdown(
          mel_d0, mel_b, mel_c, mel_delta, mel_dp, mel_mu, mel_nfix, mel_seed,
          mel_method == "exact" ? TauMethod::Exact : TauMethod::Linear, mel_tol);
      Output out(mel_out);
      write_meltdown_csv(out.stream(), t);
    } else if (mic_cmd->parsed()) {
      MicroOptions opts;
      opts.log_events = !mic_out.empty();
      const MicroResult res = simulate_microscopic(mic_init, mic_b, mic_d0, mic_c, mic_delta,
                                                   mic_dp, mic_mu, mic_K, mic_seed, mic_tend,
                                                   opts);
      if (!mic_out.empty()) {
        Output out(mic_out);
        out.stream() << "time,event,size,polymorphic_loci\n";
        for (const MicroEvent& e : res.events_log)
          out.stream() << csv::num(e.time) << ',' << e.type << ',' << e.size << ','
                       << e.polymorphic_loci << '\n';
      }
      if (!mic_hist.empty()) {
        Output out(mic_hist);
        out.stream() << "N,time,mono_time\n";
        for (std::size_t N = 2; N < res.size_occupancy.size(); ++N) {
          const double mono =
              N < res.mono_size_occupancy.size() ? res.mono_size_occupancy[N] : 0.0;
          out.stream() << N << ',' << csv::num(res.size_occupancy[N]) << ',' << csv::num(mono)
                       << '\n';
        }
      }
      std::cout << "elapsed = " << csv::num(res.elapsed) << '\n'
                << "events = " << res.events << '\n'
                << "mutations_arisen = " << res.mutations_arisen << '\n'
                << "mutations_fixed = " << res.mutations_fixed << '\n'
                << "mutations_lost = " << res.mutations_lost << '\n'
                << "time_monomorphic = " << csv::num(res.time_monomorphic) << '\n'
                << "censored = " << (res.censored ? 1 : 0) << '\n';
    } else if (ver_cmd->parsed()) {
      const std::vector<CriterionResult> results = run_acceptance(std::cout, ver_only);
      bool all = true;
      for (const auto& r : results) all = all && r.pass;
      if (!all) {
        std::cerr << "error: verify: one or more criteria failed" << std::endl;
        return 3;
      }
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: validation: " << e.what() << std::endl;
    return 1;
  } catch (const NumericalFailure& e) {
    std::cerr << "error: numeric: " << e.what() << std::endl;
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: validation: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: numeric: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
