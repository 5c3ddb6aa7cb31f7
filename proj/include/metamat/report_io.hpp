#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "metamat/field.hpp"
#include "metamat/recipe.hpp"

namespace metamat {

// Scientific notation, 6 significant digits, '.' decimal separator.
std::string sci(double value);

// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& text);

using ParamEcho = std::vector<std::pair<std::string, std::string>>;

// Every numeric parameter printed round-trip exact, plus the coefficients.
ParamEcho echo_params(const DesignParams& params);
// key=value lines, readable back as a config file.
void write_echo(std::ostream& out, const ParamEcho& echo);

// epsilon,m,M,a,ratio,E
void write_design_csv(std::ostream& out, const DesignReport& report);
nlohmann::ordered_json design_json(const DesignReport& report, const ParamEcho& echo);

// l,x1,x2,x3,re,im
void write_field_csv(std::ostream& out, const FieldSolution& field, const BallLattice& lattice);
nlohmann::ordered_json field_json(const FieldSolution& field, const BallLattice& lattice);

// m,M,e_effective,e_collocation,model_bound
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);
nlohmann::ordered_json convergence_json(const ConvergenceReport& report, const ParamEcho& echo);

// Round-trip exact shortest representation.
std::string exact(double value);

}  // namespace metamat
