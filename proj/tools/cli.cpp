#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "metamat/field.hpp"
#include "reference_tables.hpp"

namespace metamat::cli {

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw InvalidParameter("bad integer list '" + text + "'");
    }
    if (used != item.size()) throw InvalidParameter("bad integer list '" + text + "'");
    values.push_back(v);
  }
  if (values.empty()) throw InvalidParameter("empty integer list");
  return values;
}

std::array<double, 3> parse_direction(const std::string& text) {
  std::array<double, 3> v{};
  std::stringstream ss(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= 3) throw InvalidParameter("alpha needs three components");
    try {
      v[i++] = std::stod(item);
    } catch (const std::exception&) {
      throw InvalidParameter("bad alpha component '" + item + "'");
    }
  }
  if (i != 3) throw InvalidParameter("alpha needs three components");
  return v;
}

std::string join_ints(const std::vector<int>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + std::to_string(values[i]);
  return s;
}

// Destination for the main report: --out file or the given stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InvalidParameter("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

void write_echo_for(const RunConfig& config, const ParamEcho& echo, std::ostream& err) {
  if (!config.out.empty()) {
    std::ofstream f(config.out + ".params", std::ios::binary);
    if (!f) throw InvalidParameter("cannot open '" + config.out + ".params'");
    write_echo(f, echo);
  } else {
    for (const auto& [key, value] : echo) err << "# " << key << '=' << value << '\n';
  }
}

SolverOptions solver_options(const RunConfig& config) {
  SolverOptions options;
  options.dense_cutoff = config.dense_cutoff;
  options.tolerance = config.tol;
  options.subcells = config.subcells;
  return options;
}

void check_format(const RunConfig& config) {
  if (config.format != "csv" && config.format != "json") {
    throw InvalidParameter("format must be csv or json, got '" + config.format + "'");
  }
}

double rel_dev(double value, double reference) {
  return reference == 0.0 ? std::abs(value) : std::abs(value - reference) / std::abs(reference);
}

}  // namespace

DesignParams make_params(const RunConfig& config) {
  DesignParams params;
  params.k = config.k;
  params.kappa = config.kappa;
  params.P = config.P;
  params.epsilon = config.eps;
  params.alpha = config.alpha;
  params.gamma = config.gamma ? *config.gamma : default_gamma(config.k, config.P, config.kappa);
  if (!config.preset.empty() && !config.n2.empty()) {
    throw InvalidParameter("give either --preset or --n2, not both");
  }
  if (!config.preset.empty()) {
    params.n2 = preset(config.preset, config.b, config.P);
  } else if (!config.n2.empty()) {
    params.n2 = parse(config.n2, parse_smoothness(config.smoothness));
  } else {
    throw InvalidParameter("a coefficient is required: --preset ex1..ex4 or --n2 <formula>");
  }
  params.n0sq = parse(config.n0sq);
  return params;
}

ParamEcho run_echo(const RunConfig& config, const DesignParams& params) {
  ParamEcho echo{{"command", config.subcommand}};
  for (auto& kv : echo_params(params)) echo.push_back(std::move(kv));
  if (!config.preset.empty()) {
    echo.emplace_back("preset", config.preset);
    echo.emplace_back("b", std::to_string(config.b));
  }
  echo.emplace_back("mode", to_string(config.mode));
  echo.emplace_back("m-max", std::to_string(config.m_max));
  if (config.subcommand == "solve" || config.subcommand == "convergence") {
    echo.emplace_back("dense-cutoff", std::to_string(config.dense_cutoff));
    echo.emplace_back("tol", exact(config.tol));
    echo.emplace_back("subcells", std::to_string(config.subcells));
  }
  if (config.subcommand == "solve") echo.emplace_back("m", std::to_string(config.m));
  if (config.subcommand == "convergence") {
    echo.emplace_back("m-list", join_ints(config.m_list));
    echo.emplace_back("fine-m", std::to_string(config.fine_m));
  }
  if (config.subcommand == "table") echo.emplace_back("table", std::to_string(config.table));
  echo.emplace_back("determinism", "no random numbers; results do not depend on the thread count");
  return echo;
}

int cmd_design(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_format(config);
  const DesignParams params = make_params(config);
  for (const std::string& w : params.validate()) err << "warning: " << w << '\n';
  const ParamEcho echo = run_echo(config, params);
  std::ostream& summary = config.out.empty() ? err : out;

  auto emit = [&](const DesignReport& report) {
    Sink sink(config.out, out);
    if (config.format == "json") {
      sink.stream() << design_json(report, echo).dump(2) << '\n';
    } else {
      write_design_csv(sink.stream(), report);
    }
    write_echo_for(config, echo, err);
  };

  try {
    const DesignReport report = minimal_design(params, config.mode, config.m_max);
    emit(report);
    const DesignRow& acc = report.accepted();
    summary << "accepted m=" << acc.m << " M=" << acc.M << " a=" << sci(acc.a) << " a/d=" << sci(acc.ratio)
            << " E=" << sci(acc.E) << " |zeta| in [" << sci(acc.zeta_min) << ", " << sci(acc.zeta_max) << "]\n";
    return kSuccess;
  } catch (const NoConvergence& e) {
    if (!e.rows().empty()) emit(DesignReport{params, config.mode, e.rows()});
    err << "error: " << e.what() << '\n';
    return kNoConvergence;
  }
}

int cmd_table(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_format(config);
  const std::string name = table_preset(config.table);
  const ErrorMode other_mode =
      config.mode == ErrorMode::MaxOverCenters ? ErrorMode::FirstCenter : ErrorMode::MaxOverCenters;

  nlohmann::ordered_json json_rows = nlohmann::ordered_json::array();
  std::ostringstream csv;
  csv << "table,k,epsilon,mode,source,m,M,a,ratio,E,E_other_mode,ref_m,ref_M,ref_a,ref_ratio,ref_E,dev_M,dev_a,"
         "dev_E,status,note\r\n";

  std::string note;
  if (config.table == 2) note = "E column not reproducible under either error mode";
  if (config.table == 3 && config.mode == ErrorMode::MaxOverCenters) {
    note = "reference E column matches first-center evaluation";
  }

  ParamEcho echo;
  for (const ReferenceRow& ref : reference_rows()) {
    if (ref.table != config.table) continue;
    RunConfig rc = config;
    rc.preset = name;
    rc.n2.clear();
    rc.k = ref.k;
    rc.eps = ref.epsilon;
    const DesignParams params = make_params(rc);
    if (echo.empty()) {
      echo = run_echo(rc, params);
      // k and eps vary per row; the echo records the shared inputs.
      std::erase_if(echo, [&](const auto& kv) {
        return kv.first == "k" || kv.first == "eps" || (kv.first == "gamma" && !config.gamma);
      });
    }

    const DesignReport report = minimal_design(params, config.mode, config.m_max);
    std::vector<std::pair<std::string, DesignRow>> rows{{"algorithm", report.accepted()}};
    if (report.accepted().m != ref.m) rows.emplace_back("reference-m", evaluate_design(params, ref.m, config.mode));

    for (const auto& [source, row] : rows) {
      const double e_other = evaluate_design(params, row.m, other_mode).E;
      const double dev_M = rel_dev(static_cast<double>(row.M), ref.M);
      const double dev_a = rel_dev(row.a, ref.a);
      const double dev_E = rel_dev(row.E, ref.E);
      std::string status;
      auto flag = [&status](const char* what) { status += status.empty() ? what : std::string(";") + what; };
      if (row.m != ref.m) flag("m");
      if (dev_M > kStructureTolerance) flag("M");
      if (dev_a > kStructureTolerance) flag("a");
      if (dev_E > kErrorTolerance) flag("E");
      if (status.empty()) status = "match";

      csv << config.table << ',' << exact(ref.k) << ',' << sci(ref.epsilon) << ',' << to_string(config.mode) << ','
          << source << ',' << row.m << ',' << row.M << ',' << sci(row.a) << ',' << sci(row.ratio) << ','
          << sci(row.E) << ',' << sci(e_other) << ',' << ref.m << ',' << sci(ref.M) << ',' << sci(ref.a) << ','
          << sci(ref.ratio) << ',' << sci(ref.E) << ',' << sci(dev_M) << ',' << sci(dev_a) << ',' << sci(dev_E)
          << ',' << status << ',' << csv_field(note) << "\r\n";
      json_rows.push_back({{"table", config.table},
                           {"k", ref.k},
                           {"epsilon", ref.epsilon},
                           {"source", source},
                           {"m", row.m},
                           {"M", row.M},
                           {"a", row.a},
                           {"ratio", row.ratio},
                           {"E", row.E},
                           {"E_other_mode", e_other},
                           {"zeta_range", {row.zeta_min, row.zeta_max}},
                           {"reference", {{"m", ref.m}, {"M", ref.M}, {"a", ref.a}, {"ratio", ref.ratio}, {"E", ref.E}}},
                           {"deviation", {{"M", dev_M}, {"a", dev_a}, {"E", dev_E}}},
                           {"status", status}});
    }
  }

  Sink sink(config.out, out);
  if (config.format == "json") {
    nlohmann::ordered_json doc{{"parameters", nlohmann::ordered_json::object()},
                               {"mode", to_string(config.mode)},
                               {"note", note},
                               {"rows", json_rows}};
    for (const auto& [key, value] : echo) doc["parameters"][key] = value;
    sink.stream() << doc.dump(2) << '\n';
  } else {
    sink.stream() << csv.str();
  }
  write_echo_for(config, echo, err);
  return kSuccess;
}

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_format(config);
  const DesignParams params = make_params(config);
  for (const std::string& w : params.validate()) err << "warning: " << w << '\n';
  const ParamEcho echo = run_echo(config, params);
  const SolverOptions options = solver_options(config);

  const BallLattice lattice = build_lattice(config.m, params);
  const FieldSolution u0 = incident_field(params, lattice);
  const FieldSolution ue = solve_effective(lattice, params, options);
  const FieldSolution uc = solve_collocation(lattice, params, options);
  const double gap = sup_distance(ue, uc);

  if (!config.out.empty()) {
    if (config.format == "json") {
      nlohmann::ordered_json doc{{"parameters", nlohmann::ordered_json::object()},
                                 {"sup_distance_effective_collocation", gap},
                                 {"incident", field_json(u0, lattice)},
                                 {"effective", field_json(ue, lattice)},
                                 {"collocation", field_json(uc, lattice)}};
      for (const auto& [key, value] : echo) doc["parameters"][key] = value;
      Sink sink(config.out, out);
      sink.stream() << doc.dump(2) << '\n';
    } else {
      for (const FieldSolution* f : {&u0, &ue, &uc}) {
        Sink sink(config.out + "." + to_string(f->kind) + ".csv", out);
        write_field_csv(sink.stream(), *f, lattice);
      }
    }
    write_echo_for(config, echo, err);
  }

  out << "M=" << lattice.count() << " m=" << lattice.m() << " P=" << lattice.P() << '\n';
  out << "effective: method=" << ue.method << " residual=" << sci(ue.residual) << '\n';
  out << "collocation: method=" << uc.method << " residual=" << sci(uc.residual) << '\n';
  out << "sup_distance(effective, collocation)=" << sci(gap) << '\n';
  return kSuccess;
}

int cmd_convergence(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_format(config);
  const DesignParams params = make_params(config);
  for (const std::string& w : params.validate()) err << "warning: " << w << '\n';
  const ParamEcho echo = run_echo(config, params);
  const ConvergenceReport report = convergence_study(params, config.m_list, config.fine_m, solver_options(config));

  {
    Sink sink(config.out, out);
    if (config.format == "json") {
      sink.stream() << convergence_json(report, echo).dump(2) << '\n';
    } else {
      write_convergence_csv(sink.stream(), report);
    }
  }
  write_echo_for(config, echo, err);

  std::ostream& summary = config.out.empty() ? err : out;
  auto slope = [](const std::optional<double>& s) { return s ? sci(*s) : std::string("undefined"); };
  summary << "slope_effective=" << slope(report.slope_effective)
          << " slope_collocation=" << slope(report.slope_collocation)
          << " expected_rate=" << slope(report.expected_rate) << " fitted_constant=" << sci(report.fitted_constant)
          << '\n';
  return kSuccess;
}

namespace {

void add_common(CLI::App* cmd, RunConfig& c, std::string& gamma_text, std::string& mode_text,
                std::string& alpha_text) {
  cmd->add_option("--preset", c.preset, "coefficient preset: ex1, ex2, ex3 or ex4");
  cmd->add_option("--n2", c.n2, "desired coefficient formula over x1, x2, x3");
  cmd->add_option("--n0sq", c.n0sq, "background coefficient formula");
  cmd->add_option("--smoothness", c.smoothness, "twice-differentiable | lipschitz:L | modulus:<text>");
  cmd->add_option("--b", c.b, "ex2 width parameter (sigma = sqrt(3)/(2 b P))");
  cmd->add_option("--k", c.k, "wave number");
  cmd->add_option("--kappa", c.kappa, "impedance exponent in (0,1)");
  cmd->add_option("--P", c.P, "coarse partition count per axis");
  cmd->add_option("--gamma", gamma_text, "gap constant (default 10k(1/(2P))^((1+kappa)/3))");
  cmd->add_option("--eps", c.eps, "stopping tolerance");
  cmd->add_option("--alpha", alpha_text, "incident direction, e.g. 1,0,0");
  cmd->add_option("--mode", mode_text, "max-over-centers | first-center");
  cmd->add_option("--m-max", c.m_max, "cap on m");
  cmd->add_option("--out", c.out, "output path");
  cmd->add_option("--format", c.format, "csv | json");
  cmd->add_option("--dense-cutoff", c.dense_cutoff, "largest system solved by dense LU");
  cmd->add_option("--tol", c.tol, "relative residual tolerance");
  cmd->add_option("--subcells", c.subcells, "odd sub-cell count per axis for cell integrals");
  cmd->add_option("--threads", c.threads, "OpenMP thread count (0 = default)");
}

// key=value lines -> "--key value" argument pairs.
std::vector<std::string> config_file_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidParameter(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    // Echo-only keys; a parameter echo can be fed back unchanged.
    if (key == "command" || key == "determinism" || key == "table" || key == "n2_imag") continue;
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  const bool has_preset =
      std::any_of(entries.begin(), entries.end(), [](const auto& kv) { return kv.first == "preset"; });
  std::vector<std::string> args;
  for (const auto& [key, value] : entries) {
    if (has_preset && (key == "n2" || key == "smoothness")) continue;
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  // Splice config-file entries in front of the command-line flags so the
  // latter win under the take-last policy.
  std::vector<std::string> args;
  std::vector<std::string> file_args;
  for (std::size_t i = 0; i < raw_args.size(); ++i) {
    if (raw_args[i] == "--config" && i + 1 < raw_args.size()) {
      try {
        file_args = config_file_args(raw_args[++i]);
      } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
      }
    } else if (raw_args[i].rfind("--config=", 0) == 0) {
      try {
        file_args = config_file_args(raw_args[i].substr(9));
      } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
      }
    } else {
      args.push_back(raw_args[i]);
    }
  }
  if (!file_args.empty()) {
    const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) {
      return a == "design" || a == "table" || a == "solve" || a == "convergence";
    });
    if (sub == args.end()) {
      err << "error: a subcommand is required (design, table, solve, convergence)\n";
      return kUsage;
    }
    args.insert(sub + 1, file_args.begin(), file_args.end());
  }

  CLI::App app{"Metamaterial design by embedded small impedance balls"};
  app.require_subcommand(1, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunConfig config;
  std::string gamma_text;
  std::string mode_text;
  std::string alpha_text;
  std::string m_list_text;

  CLI::App* design = app.add_subcommand("design", "find the smallest ball count meeting the tolerance");
  CLI::App* table = app.add_subcommand("table", "reproduce one of the reference design tables");
  CLI::App* solve = app.add_subcommand("solve", "solve the effective-field and collocation systems");
  CLI::App* convergence = app.add_subcommand("convergence", "measure convergence against a fine reference");
  for (CLI::App* cmd : {design, table, solve, convergence}) add_common(cmd, config, gamma_text, mode_text, alpha_text);
  table->add_option("table_id", config.table, "table number 1..4")->required();
  solve->add_option("--m", config.m, "refinement m");
  convergence->add_option("--m-list", m_list_text, "comma-separated ascending m values");
  convergence->add_option("--fine-m", config.fine_m, "refinement of the reference solution");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (!gamma_text.empty()) config.gamma = std::stod(gamma_text);
    if (!mode_text.empty()) config.mode = parse_error_mode(mode_text);
    if (!alpha_text.empty()) config.alpha = parse_direction(alpha_text);
    if (!m_list_text.empty()) config.m_list = parse_int_list(m_list_text);
  } catch (const std::invalid_argument&) {
    err << "error: bad --gamma value '" << gamma_text << "'\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (config.threads > 0) omp_set_num_threads(config.threads);

  try {
    if (design->parsed()) {
      config.subcommand = "design";
      return cmd_design(config, out, err);
    }
    if (table->parsed()) {
      config.subcommand = "table";
      return cmd_table(config, out, err);
    }
    if (solve->parsed()) {
      config.subcommand = "solve";
      return cmd_solve(config, out, err);
    }
    config.subcommand = "convergence";
    return cmd_convergence(config, out, err);
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace metamat::cli
