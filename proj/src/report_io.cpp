#include "metamat/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>

namespace metamat {

std::string sci(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", value);
  return buf;
}

std::string exact(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

ParamEcho echo_params(const DesignParams& params) {
  ParamEcho echo{
      {"k", exact(params.k)},
      {"kappa", exact(params.kappa)},
      {"gamma", exact(params.gamma)},
      {"P", std::to_string(params.P)},
      {"eps", exact(params.epsilon)},
      {"n2", params.n2.source},
      {"n0sq", params.n0sq.source},
      {"smoothness", params.n2.smoothness.describe()},
      {"alpha", exact(params.alpha[0]) + "," + exact(params.alpha[1]) + "," + exact(params.alpha[2])},
  };
  if (params.n2_imag) echo.emplace_back("n2_imag", params.n2_imag->source);
  return echo;
}

void write_echo(std::ostream& out, const ParamEcho& echo) {
  for (const auto& [key, value] : echo) out << key << '=' << value << '\n';
}

void write_design_csv(std::ostream& out, const DesignReport& report) {
  out << "epsilon,m,M,a,ratio,E\r\n";
  for (const DesignRow& row : report.rows) {
    out << sci(report.params.epsilon) << ',' << row.m << ',' << row.M << ',' << sci(row.a) << ',' << sci(row.ratio)
        << ',' << sci(row.E) << "\r\n";
  }
}

namespace {

nlohmann::ordered_json echo_json(const ParamEcho& echo) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [key, value] : echo) j[key] = value;
  return j;
}

}  // namespace

nlohmann::ordered_json design_json(const DesignReport& report, const ParamEcho& echo) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const DesignRow& row : report.rows) {
    rows.push_back({{"epsilon", report.params.epsilon},
                    {"m", row.m},
                    {"M", row.M},
                    {"a", row.a},
                    {"ratio", row.ratio},
                    {"E", row.E},
                    {"p_defect", row.p_defect},
                    {"zeta_range", {row.zeta_min, row.zeta_max}}});
  }
  const DesignRow& acc = report.accepted();
  return {{"parameters", echo_json(echo)},
          {"mode", to_string(report.mode)},
          {"rows", rows},
          {"accepted", {{"m", acc.m}, {"M", acc.M}, {"a", acc.a}, {"zeta_range", {acc.zeta_min, acc.zeta_max}}}}};
}

void write_field_csv(std::ostream& out, const FieldSolution& field, const BallLattice& lattice) {
  out << "l,x1,x2,x3,re,im\r\n";
  for (std::int64_t l = 0; l < lattice.count(); ++l) {
    const Point x = lattice.center(l);
    const Complex v = field.values[static_cast<std::size_t>(l)];
    out << l << ',' << sci(x[0]) << ',' << sci(x[1]) << ',' << sci(x[2]) << ',' << sci(v.real()) << ','
        << sci(v.imag()) << "\r\n";
  }
}

nlohmann::ordered_json field_json(const FieldSolution& field, const BallLattice& lattice) {
  nlohmann::ordered_json re = nlohmann::ordered_json::array();
  nlohmann::ordered_json im = nlohmann::ordered_json::array();
  for (const Complex& v : field.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  return {{"kind", to_string(field.kind)}, {"method", field.method},     {"residual", field.residual},
          {"m", lattice.m()},              {"P", lattice.P()},           {"M", lattice.count()},
          {"re", re},                      {"im", im}};
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  out << "m,M,e_effective,e_collocation,model_bound\r\n";
  for (const ConvergenceRow& row : report.rows) {
    out << row.m << ',' << row.M << ',' << sci(row.e_effective) << ',' << sci(row.e_collocation) << ','
        << sci(row.model_bound) << "\r\n";
  }
}

nlohmann::ordered_json convergence_json(const ConvergenceReport& report, const ParamEcho& echo) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ConvergenceRow& row : report.rows) {
    rows.push_back({{"m", row.m},
                    {"M", row.M},
                    {"e_effective", row.e_effective},
                    {"e_collocation", row.e_collocation},
                    {"model_bound", row.model_bound}});
  }
  auto optional_number = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  return {{"parameters", echo_json(echo)},
          {"fine_m", report.fine_m},
          {"rows", rows},
          {"slope_effective", optional_number(report.slope_effective)},
          {"slope_collocation", optional_number(report.slope_collocation)},
          {"fitted_constant", report.fitted_constant},
          {"constant_spread", report.constant_spread},
          {"expected_rate", optional_number(report.expected_rate)},
          {"smoothness", report.smoothness}};
}

}  // namespace metamat
