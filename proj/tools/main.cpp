// Batch driver: every computation of the library as a subcommand with
// reproducible CSV output. Identical configuration yields byte-identical
// files; numbers are printed with 17 significant digits.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <deque>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blowup/csv.hpp"
#include "blowup/expansion.hpp"
#include "blowup/nonlinearity.hpp"
#include "blowup/phase_plane.hpp"
#include "blowup/picard.hpp"
#include "blowup/universality.hpp"

namespace {

constexpr const char* kVersion = "blowup 1.0.0";

enum ExitCode : int {
  kOk = 0,
  kNegative = 2,
  kInconclusive = 3,
  kConfigError = 64,
  kNumericFailure = 70,
};

struct NlSpec {
  std::string family = "power";
  double p = 2.0;
  std::string expr;
  double a = 0.0;
  std::string tail_kind = "power";
  double tail_amplitude = 1.0;
  double tail_exponent = 3.0;
  double tail_cutoff = 1.0;
  double tail_vtol = 1e-6;

  blowup::Nonlinearity build() const {
    using blowup::TailModel;
    if (family == "power") return blowup::make_power(p);
    if (family == "exponential") return blowup::make_exponential();
    if (family == "custom") {
      TailModel tail = tail_kind == "power"
                           ? TailModel::power_law(tail_amplitude, tail_exponent,
                                                  tail_cutoff, tail_vtol)
                           : (tail_kind == "exp"
                                  ? TailModel::exponential(tail_amplitude,
                                                           tail_exponent,
                                                           tail_cutoff,
                                                           tail_vtol)
                                  : TailModel::numeric_only(tail_cutoff));
      return blowup::make_custom(expr, a, tail);
    }
    throw std::invalid_argument("--family must be power, exponential or custom");
  }

  std::string describe() const {
    std::ostringstream os;
    os << "family=" << family;
    if (family == "power") os << " p=" << blowup::fmt17(p);
    if (family == "custom")
      os << " expr=" << expr << " a=" << blowup::fmt17(a) << " tail_kind="
         << tail_kind << " tail_amplitude=" << blowup::fmt17(tail_amplitude)
         << " tail_exponent=" << blowup::fmt17(tail_exponent) << " tail_cutoff="
         << blowup::fmt17(tail_cutoff) << " tail_vtol="
         << blowup::fmt17(tail_vtol);
    return os.str();
  }
};

struct Job {
  NlSpec nl;
  int N = 3;
  double rho = 0.2;
  double sup_tol = 1e-10;
  int max_iters = 50;
  double grid_density = 48.0;
  double d_min = 1e-5;
  double tol_radius = 1e-8;
  std::vector<double> ds = {1e-2, 1e-3, 1e-4};
  int order = 2;
  int k = 0;
};

struct JobResult {
  std::string text;
  int code = kOk;
};

blowup::PicardConfig picard_config(const Job& j) {
  blowup::PicardConfig cfg;
  cfg.rho = j.rho;
  cfg.sup_tol = j.sup_tol;
  cfg.max_iters = j.max_iters;
  cfg.grid_per_decade = j.grid_density;
  cfg.d_min = j.d_min;
  return cfg;
}

std::string header(const std::string& cmd, const Job& j,
                   const std::string& extra = "") {
  std::ostringstream os;
  os << "# " << kVersion << "\n";
  os << "# cmd=" << cmd << " " << j.nl.describe() << " N=" << j.N
     << " rho=" << blowup::fmt17(j.rho) << " sup_tol="
     << blowup::fmt17(j.sup_tol) << " max_iters=" << j.max_iters
     << " grid_density=" << blowup::fmt17(j.grid_density) << " d_min="
     << blowup::fmt17(j.d_min) << " tol_radius=" << blowup::fmt17(j.tol_radius)
     << " order=" << j.order << " k=" << j.k << " ds=";
  for (size_t i = 0; i < j.ds.size(); ++i)
    os << (i ? "," : "") << blowup::fmt17(j.ds[i]);
  os << "\n";
  if (!extra.empty()) os << extra;
  return os.str();
}

// ---- subcommand payloads ----------------------------------------------

JobResult run_ko(const Job& j) {
  using blowup::Verdict;
  auto nl = j.nl.build();
  auto res = blowup::keller_osserman(nl);
  JobResult out;
  std::ostringstream os;
  os << header("ko", j);
  os << "verdict=" << blowup::to_string(res.verdict) << "\n";
  os << "tail_integral=" << blowup::fmt17(res.tail_integral) << "\n";
  out.text = os.str();
  out.code = res.verdict == Verdict::Holds
                 ? kOk
                 : (res.verdict == Verdict::Fails ? kNegative : kInconclusive);
  return out;
}

JobResult run_solve(const Job& j) {
  auto nl = j.nl.build();
  auto sol = blowup::solve_large_solution(nl, j.N, j.tol_radius);
  std::ostringstream extra;
  extra << "# center_value=" << blowup::fmt17(sol.center_value)
        << " raw_blowup_radius=" << blowup::fmt17(sol.raw_blowup_radius)
        << "\n";
  std::ostringstream os;
  os << header("solve", j, extra.str());
  os << "u,g,r,v\n";
  const auto& p = sol.path;
  for (size_t i = 0; i < p.u.size(); ++i) {
    const double v = 1.0 / p.dr[i];
    os << blowup::fmt17(p.u[i]) << "," << blowup::fmt17(p.g[i]) << ","
       << blowup::fmt17(p.r[i] / sol.raw_blowup_radius) << ","
       << blowup::fmt17(v) << "\n";
  }
  return {os.str(), kOk};
}

JobResult run_picard(const Job& j) {
  auto nl = j.nl.build();
  auto res = blowup::fixed_point(nl, j.N, picard_config(j));
  std::ostringstream extra;
  extra << "# U0=" << blowup::fmt17(res.ws->U0) << " Umax="
        << blowup::fmt17(res.ws->Umax) << " converged_at_iteration="
        << res.converged_at << " residual=" << blowup::fmt17(res.residual)
        << " kappa=";
  for (size_t i = 0; i < res.kappa.size(); ++i)
    extra << (i ? "," : "") << blowup::fmt17(res.kappa[i]);
  extra << "\n";
  std::ostringstream os;
  os << header("picard", j, extra.str());
  os << "k,u,v_over_v0\n";
  for (const auto& it : res.history) {
    const auto& nodes = it.ws->grid.nodes;
    for (size_t i = 0; i < nodes.size(); ++i)
      os << it.k << "," << blowup::fmt17(nodes[i]) << ","
         << blowup::fmt17(it.w[i]) << "\n";
  }
  return {os.str(), kOk};
}

JobResult run_expand(const Job& j) {
  if (j.nl.family != "power")
    throw std::invalid_argument("expand requires --family power");
  auto e = blowup::power_law_expansion(j.nl.p, j.N, j.order);
  std::ostringstream extra;
  extra << "# m=" << blowup::fmt17(e.m) << " K=" << e.K
        << " singular_terms=" << blowup::singular_term_count(j.nl.p)
        << " resonant_lattice=" << (e.resonant_lattice ? 1 : 0)
        << " computed_order=" << e.computed_order << " normalization_factor="
        << blowup::fmt17(e.normalization_factor) << "\n";
  std::ostringstream os;
  os << header("expand", j, extra.str());
  os << "p,N,k,exponent,a_k\n";
  for (size_t k = 0; k < e.a.size(); ++k)
    os << blowup::fmt17(e.p) << "," << e.N << "," << k << ","
       << blowup::fmt17(e.exponents[k]) << "," << blowup::fmt17(e.a[k]) << "\n";
  return {os.str(), kOk};
}

JobResult run_universal(const Job& j) {
  using C = blowup::UniversalityReport::Class;
  auto nl = j.nl.build();
  auto rep = blowup::classify(nl);
  std::ostringstream extra;
  extra << "# verdict=" << blowup::to_string(rep.verdict)
        << " sampled_verdict=" << blowup::to_string(rep.sampled_verdict);
  if (rep.closed_form_limit)
    extra << " closed_form_limit=" << blowup::fmt17(*rep.closed_form_limit);
  extra << "\n";
  std::ostringstream os;
  os << header("universal", j, extra.str());
  os << "u,phi\n";
  for (size_t i = 0; i < rep.u_samples.size(); ++i)
    os << blowup::fmt17(rep.u_samples[i]) << ","
       << blowup::fmt17(rep.phi_samples[i]) << "\n";

  if (j.N > 1) {
    std::vector<double> rs;
    for (double d : j.ds) rs.push_back(1.0 - d);
    auto gap = blowup::second_term_gap(nl, j.N, rs, picard_config(j));
    os << "# section=second_term_gap\n";
    os << "r,gap,bound\n";
    for (size_t i = 0; i < gap.r.size(); ++i)
      os << blowup::fmt17(gap.r[i]) << "," << blowup::fmt17(gap.gap[i]) << ","
         << blowup::fmt17(gap.upper_rhs[i]) << "\n";
  }
  JobResult out{os.str(), kOk};
  out.code = rep.verdict == C::Universal
                 ? kOk
                 : (rep.verdict == C::NonUniversal ? kNegative
                                                   : kInconclusive);
  return out;
}

JobResult run_compare(const Job& j) {
  auto nl = j.nl.build();
  auto sol = blowup::solve_large_solution(nl, j.N, j.tol_radius);
  auto res = blowup::fixed_point(nl, j.N, picard_config(j));
  std::vector<double> rs;
  for (double d : j.ds) rs.push_back(1.0 - d);
  auto u_ref = [&sol](double r) { return sol.u_at(r); };
  auto gaps = blowup::asymptotic_gap(res, std::min<int>(j.k, res.converged_at),
                                     u_ref, rs);
  auto one = blowup::verify_one_term(nl, sol, rs);
  std::ostringstream os;
  os << header("compare", j);
  os << "r,u_oracle,u_k,gap_ratio_oracle,gap_ratio_next,one_term_gap,one_term_"
        "bound\n";
  const auto& vk = res.history[std::min<size_t>(j.k, res.history.size() - 1)];
  for (size_t i = 0; i < rs.size(); ++i) {
    const double uk = blowup::invert_uk(vk, rs[i]);
    os << blowup::fmt17(rs[i]) << "," << blowup::fmt17(one.u_oracle[i]) << ","
       << blowup::fmt17(uk) << "," << blowup::fmt17(gaps.ratio_oracle[i]) << ","
       << blowup::fmt17(gaps.ratio_next[i]) << "," << blowup::fmt17(one.gap[i])
       << "," << blowup::fmt17(one.bound[i]) << "\n";
  }
  return {os.str(), kOk};
}

// ---- option plumbing ---------------------------------------------------

struct CmdOptions {
  std::vector<double> ps;
  std::vector<int> Ns;
  Job base;
};

void add_common(CLI::App* cmd, CmdOptions& o) {
  cmd->add_option("--family", o.base.nl.family,
                  "nonlinearity family: power | exponential | custom");
  cmd->add_option("--p", o.ps, "power exponent(s), comma separated")
      ->delimiter(',');
  cmd->add_option("--expr", o.base.nl.expr, "custom f(u) expression");
  cmd->add_option("--a", o.base.nl.a, "custom positivity threshold");
  cmd->add_option("--tail-kind", o.base.nl.tail_kind,
                  "custom tail: power | exp | numeric");
  cmd->add_option("--tail-amplitude", o.base.nl.tail_amplitude);
  cmd->add_option("--tail-exponent", o.base.nl.tail_exponent);
  cmd->add_option("--tail-cutoff", o.base.nl.tail_cutoff);
  cmd->add_option("--tail-vtol", o.base.nl.tail_vtol);
  cmd->add_option("--N", o.Ns, "dimension(s), comma separated")
      ->delimiter(',');
  cmd->add_option("--rho", o.base.rho, "contraction ball radius, in (0, 1/4)");
  cmd->add_option("--sup-tol", o.base.sup_tol);
  cmd->add_option("--max-iters", o.base.max_iters);
  cmd->add_option("--grid-density", o.base.grid_density,
                  "grid points per decade");
  cmd->add_option("--d-min", o.base.d_min,
                  "smallest boundary distance inversions must support");
  cmd->add_option("--tol-radius", o.base.tol_radius);
  cmd->add_option("--d", o.base.ds, "boundary distances 1-r, comma separated")
      ->delimiter(',');
  cmd->add_option("--order", o.base.order, "expansion order");
  cmd->add_option("--k", o.base.k, "iterate index");
}

int run_jobs(const CmdOptions& o, const std::string& out_path, int jobs,
             JobResult (*fn)(const Job&)) {
  std::vector<Job> matrix;
  std::vector<double> ps = o.ps.empty() ? std::vector<double>{o.base.nl.p}
                                        : o.ps;
  std::vector<int> Ns = o.Ns.empty() ? std::vector<int>{o.base.N} : o.Ns;
  for (double p : ps)
    for (int N : Ns) {
      Job j = o.base;
      j.nl.p = p;
      j.N = N;
      matrix.push_back(j);
    }

  std::vector<JobResult> results(matrix.size());
  std::vector<std::string> errors(matrix.size());
  size_t next = 0;
  std::mutex mu;
  auto worker = [&]() {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= matrix.size()) return;
        i = next++;
      }
      try {
        results[i] = fn(matrix[i]);
      } catch (const std::invalid_argument& e) {
        errors[i] = e.what();
        results[i].code = kConfigError;
      } catch (const std::exception& e) {
        errors[i] = e.what();
        results[i].code = kNumericFailure;
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(jobs, matrix.size()));
  std::vector<std::future<void>> pool;
  for (int t = 1; t < nthreads; ++t)
    pool.push_back(std::async(std::launch::async, worker));
  worker();
  for (auto& f : pool) f.get();

  int code = kOk;
  for (size_t i = 0; i < matrix.size(); ++i) {
    if (!errors[i].empty())
      std::cerr << "job " << i << ": " << errors[i] << "\n";
    code = std::max(code, results[i].code);
    if (results[i].text.empty()) continue;
    if (out_path == "-") {
      std::cout << results[i].text;
    } else {
      std::string path = out_path;
      if (matrix.size() > 1) {
        std::ostringstream suffix;
        suffix << "-p" << matrix[i].nl.p << "-N" << matrix[i].N;
        const size_t dot = path.rfind('.');
        path = dot == std::string::npos
                   ? path + suffix.str()
                   : path.substr(0, dot) + suffix.str() + path.substr(dot);
      }
      std::ofstream f(path, std::ios::binary);
      if (!f) {
        std::cerr << "cannot write " << path << "\n";
        return kConfigError;
      }
      f << results[i].text;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Boundary blow-up asymptotics of Delta u = f(u) on the unit ball"};
  app.set_config("--config", "", "key=value configuration file; flags override");
  std::string out_path = "-";
  int jobs = 1;
  app.add_option("--out", out_path, "output path ('-' for stdout)");
  app.add_option("--jobs", jobs, "max concurrent jobs for parameter lists");
  app.require_subcommand(1);

  struct Sub {
    CLI::App* cmd;
    CmdOptions opts;
    JobResult (*fn)(const Job&);
  };
  // options bind by address, so the container must never relocate
  std::deque<Sub> subs;
  auto add = [&](const char* name, const char* help,
                 JobResult (*fn)(const Job&)) {
    subs.push_back(Sub{app.add_subcommand(name, help), {}, fn});
    add_common(subs.back().cmd, subs.back().opts);
  };

  add("ko",
      "decide the existence condition: is the integral of dt/sqrt(F(t)) "
      "finite at infinity (exit 0 = holds, 2 = fails, 3 = inconclusive)",
      run_ko);
  add("solve",
      "shoot the radial blow-up solution of u'' + (N-1)/r u' = f(u) with "
      "u(1^-) = +inf and dump the (u, g, r, v) profile",
      run_solve);
  add("picard",
      "iterate v <- sqrt(2(F - (N-1) int v/r)) to its fixed point and dump "
      "the iterate history (k, u, v/v0)",
      run_picard);
  add("expand",
      "coefficients a_k of the boundary expansion u = sum a_k d^{k-2/(p-1)} "
      "for f(u) = u^p",
      run_expand);
  add("universal",
      "classify the blow-up rate by the limit of sqrt(2F(u)) int_u G(t) "
      "(2F(t))^{-3/2} dt (exit 0 = universal, 2 = not, 3 = inconclusive)",
      run_universal);
  add("compare",
      "cross-verify the profile chain u_k against the shooting oracle: "
      "normalized gaps and the one-term bound",
      run_compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  for (const Sub& s : subs) {
    if (!s.cmd->parsed()) continue;
    try {
      return run_jobs(s.opts, out_path, jobs, s.fn);
    } catch (const std::invalid_argument& e) {
      std::cerr << e.what() << "\n";
      return kConfigError;
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return kNumericFailure;
    }
  }
  return kConfigError;
}
