#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dcuc/milp.hpp"

namespace dcuc::mps {

// Free-format MPS text for the problem: objective row COST, row senses as
// L/E/G, binaries inside INTORG markers, every column with explicit bounds.
std::string write_mps(const milp::MilpProblem& p,
                      const std::string& name = "dcuc");

// Parses the subset write_mps emits (plus OBJSENSE MIN). Unsupported
// sections such as RANGES raise ParseError. Columns between integer markers
// default to [0, 1] until a BOUNDS entry says otherwise. Row and column
// annotations are not part of the format, so the result carries none.
milp::MilpProblem read_mps(const std::string& text);

// Solution interchange: whitespace-separated name/value lines with optional
// '#' comments. The names "status" and "objective" are reserved for the
// solver verdict and its reported objective.
struct SolutionFile {
  std::string status;
  double objective = 0.0;
  bool has_objective = false;
  std::vector<std::pair<std::string, double>> values;
};

std::string write_solution(const SolutionFile& s);
SolutionFile read_solution(const std::string& text);

// Maps named values onto the problem's columns. Unknown names are ignored;
// absent columns default to zero clamped into their bounds.
std::vector<double> solution_vector(const milp::MilpProblem& p,
                                    const SolutionFile& s);

}  // namespace dcuc::mps
