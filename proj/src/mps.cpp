#include "dcuc/mps.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

namespace dcuc::mps {

namespace {

constexpr double kBig = 1e29;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_num(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty())
    throw ParseError(where + ": bad number '" + tok + "'");
  return v;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

std::vector<std::string> default_names(const std::string& stem, int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 0; i < n; ++i) names.push_back(stem + std::to_string(i + 1));
  return names;
}

}  // namespace

std::string write_mps(const milp::MilpProblem& p, const std::string& name) {
  const auto col_names = static_cast<int>(p.col_names.size()) == p.ncols
                             ? p.col_names
                             : default_names("x", p.ncols);
  const auto row_names = static_cast<int>(p.row_names.size()) == p.nrows()
                             ? p.row_names
                             : default_names("r", p.nrows());

  std::ostringstream out;
  out << "NAME " << name << "\n";
  out << "ROWS\n N COST\n";
  for (int r = 0; r < p.nrows(); ++r) {
    const char s = p.sense[r] == milp::RowSense::le
                       ? 'L'
                       : p.sense[r] == milp::RowSense::eq ? 'E' : 'G';
    out << ' ' << s << ' ' << row_names[r] << '\n';
  }

  // Collect entries column-major; the objective entry is always written so
  // every column is declared in order.
  std::vector<std::vector<std::pair<int, double>>> bycol(p.ncols);
  for (int r = 0; r < p.nrows(); ++r)
    for (const auto& [c, v] : p.rows[r]) bycol[c].push_back({r, v});

  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int c = 0; c < p.ncols; ++c) {
    const bool want_int = p.binary[c] != 0;
    if (want_int != in_int) {
      out << " M" << ++marker << " 'MARKER' '"
          << (want_int ? "INTORG" : "INTEND") << "'\n";
      in_int = want_int;
    }
    out << ' ' << col_names[c] << " COST " << num(p.obj[c]) << '\n';
    for (const auto& [r, v] : bycol[c])
      out << ' ' << col_names[c] << ' ' << row_names[r] << ' ' << num(v)
          << '\n';
  }
  if (in_int) out << " M" << ++marker << " 'MARKER' 'INTEND'\n";

  out << "RHS\n";
  for (int r = 0; r < p.nrows(); ++r)
    if (p.rhs[r] != 0.0)
      out << " RHS " << row_names[r] << ' ' << num(p.rhs[r]) << '\n';

  out << "BOUNDS\n";
  for (int c = 0; c < p.ncols; ++c) {
    const double lo = p.lb[c], up = p.ub[c];
    const std::string& cn = col_names[c];
    if (p.binary[c] && lo == 0.0 && up == 1.0) {
      out << " BV BND " << cn << '\n';
    } else if (lo == up) {
      out << " FX BND " << cn << ' ' << num(lo) << '\n';
    } else if (lo <= -kBig && up >= kBig) {
      out << " FR BND " << cn << '\n';
    } else {
      if (lo <= -kBig)
        out << " MI BND " << cn << '\n';
      else
        out << " LO BND " << cn << ' ' << num(lo) << '\n';
      if (up < kBig) out << " UP BND " << cn << ' ' << num(up) << '\n';
    }
  }
  out << "ENDATA\n";
  return out.str();
}

milp::MilpProblem read_mps(const std::string& text) {
  milp::MilpProblem p;
  std::map<std::string, int> row_of, col_of;
  int obj_rows = 0;
  std::vector<char> had_bound;
  bool in_int = false;
  bool pending_objsense = false;

  enum Section { none, rows, columns, rhs, bounds, done };
  Section sec = none;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '*') continue;
    const auto toks = tokens_of(line);
    if (toks.empty()) continue;
    const std::string where = "mps line " + std::to_string(lineno);

    const bool section_header = !std::isspace(static_cast<unsigned char>(line[0]));
    if (section_header) {
      pending_objsense = false;
      const std::string& s = toks[0];
      if (s == "NAME") continue;
      if (s == "OBJSENSE") {
        if (toks.size() > 1) {
          if (toks[1] != "MIN" && toks[1] != "MINIMIZE")
            throw ParseError(where + ": only minimization is supported");
        } else {
          pending_objsense = true;
        }
        continue;
      }
      if (s == "ROWS") { sec = rows; continue; }
      if (s == "COLUMNS") { sec = columns; continue; }
      if (s == "RHS") { sec = rhs; continue; }
      if (s == "BOUNDS") { sec = bounds; continue; }
      if (s == "RANGES")
        throw ParseError(where + ": RANGES section is not supported");
      if (s == "ENDATA") { sec = done; break; }
      throw ParseError(where + ": unknown section '" + s + "'");
    }

    if (pending_objsense) {
      if (toks[0] != "MIN" && toks[0] != "MINIMIZE")
        throw ParseError(where + ": only minimization is supported");
      pending_objsense = false;
      continue;
    }

    switch (sec) {
      case rows: {
        if (toks.size() != 2)
          throw ParseError(where + ": expected 'type name'");
        const std::string& type = toks[0];
        const std::string& rn = toks[1];
        if (type == "N") {
          if (++obj_rows > 1)
            throw ParseError(where + ": multiple objective rows");
          if (row_of.count(rn))
            throw ParseError(where + ": duplicate row '" + rn + "'");
          row_of[rn] = -1;
          continue;
        }
        milp::RowSense sense;
        if (type == "L") sense = milp::RowSense::le;
        else if (type == "E") sense = milp::RowSense::eq;
        else if (type == "G") sense = milp::RowSense::ge;
        else throw ParseError(where + ": unknown row type '" + type + "'");
        if (row_of.count(rn))
          throw ParseError(where + ": duplicate row '" + rn + "'");
        row_of[rn] = p.nrows();
        p.rows.emplace_back();
        p.sense.push_back(sense);
        p.rhs.push_back(0.0);
        p.row_names.push_back(rn);
        p.row_info.emplace_back();
        break;
      }
      case columns: {
        if (toks.size() >= 3 && toks[1] == "'MARKER'") {
          const std::string& kind = toks.back();
          if (kind == "'INTORG'") in_int = true;
          else if (kind == "'INTEND'") in_int = false;
          else throw ParseError(where + ": unknown marker '" + kind + "'");
          continue;
        }
        if (toks.size() < 3 || toks.size() % 2 == 0)
          throw ParseError(where + ": expected 'column row value' pairs");
        const std::string& cn = toks[0];
        auto it = col_of.find(cn);
        if (it == col_of.end()) {
          it = col_of.insert({cn, p.ncols}).first;
          ++p.ncols;
          p.obj.push_back(0.0);
          p.binary.push_back(in_int ? 1 : 0);
          p.lb.push_back(0.0);
          p.ub.push_back(in_int ? 1.0 : kInf);
          p.col_names.push_back(cn);
          p.col_info.emplace_back();
          had_bound.push_back(0);
        }
        const int c = it->second;
        for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
          const auto rit = row_of.find(toks[i]);
          if (rit == row_of.end())
            throw ParseError(where + ": unknown row '" + toks[i] + "'");
          const double v = parse_num(toks[i + 1], where);
          if (rit->second < 0)
            p.obj[c] = v;
          else
            p.rows[rit->second].push_back({c, v});
        }
        break;
      }
      case rhs: {
        if (toks.size() < 3 || toks.size() % 2 == 0)
          throw ParseError(where + ": expected 'set row value' pairs");
        for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
          const auto rit = row_of.find(toks[i]);
          if (rit == row_of.end())
            throw ParseError(where + ": unknown row '" + toks[i] + "'");
          if (rit->second < 0)
            throw ParseError(where + ": objective constants are not supported");
          p.rhs[rit->second] = parse_num(toks[i + 1], where);
        }
        break;
      }
      case bounds: {
        if (toks.size() < 3)
          throw ParseError(where + ": expected 'type set column [value]'");
        const std::string& type = toks[0];
        const auto cit = col_of.find(toks[2]);
        if (cit == col_of.end())
          throw ParseError(where + ": unknown column '" + toks[2] + "'");
        const int c = cit->second;
        const bool needs_value =
            type == "FX" || type == "LO" || type == "UP";
        if (needs_value && toks.size() < 4)
          throw ParseError(where + ": bound type " + type + " needs a value");
        const double v = needs_value ? parse_num(toks[3], where) : 0.0;
        if (!had_bound[c] && p.binary[c] && type != "BV") {
          // Explicit bounds override the [0,1] marker default.
          p.ub[c] = kInf;
        }
        had_bound[c] = 1;
        if (type == "BV") { p.lb[c] = 0.0; p.ub[c] = 1.0; }
        else if (type == "FX") { p.lb[c] = v; p.ub[c] = v; }
        else if (type == "LO") { p.lb[c] = v; }
        else if (type == "UP") { p.ub[c] = v; }
        else if (type == "MI") { p.lb[c] = -kInf; }
        else if (type == "PL") { p.ub[c] = kInf; }
        else if (type == "FR") { p.lb[c] = -kInf; p.ub[c] = kInf; }
        else throw ParseError(where + ": unknown bound type '" + type + "'");
        break;
      }
      case none:
        throw ParseError(where + ": data before any section header");
      case done:
        break;
    }
  }

  if (obj_rows == 0) throw ParseError("mps: no objective row");
  for (int c = 0; c < p.ncols; ++c) {
    if (!p.binary[c]) continue;
    const double lo = p.lb[c], up = p.ub[c];
    const bool ok = lo >= -1e-9 && up <= 1.0 + 1e-9 &&
                    std::abs(lo - std::round(lo)) < 1e-9 &&
                    std::abs(up - std::round(up)) < 1e-9;
    if (!ok)
      throw ParseError("mps: integer column '" + p.col_names[c] +
                       "' is not binary");
    p.lb[c] = std::round(lo);
    p.ub[c] = std::round(up);
  }
  return p;
}

std::string write_solution(const SolutionFile& s) {
  std::ostringstream out;
  if (!s.status.empty()) out << "status " << s.status << '\n';
  if (s.has_objective) out << "objective " << num(s.objective) << '\n';
  for (const auto& [name, v] : s.values) out << name << ' ' << num(v) << '\n';
  return out.str();
}

SolutionFile read_solution(const std::string& text) {
  SolutionFile s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto toks = tokens_of(line);
    if (toks.empty()) continue;
    const std::string where = "solution line " + std::to_string(lineno);
    if (toks.size() != 2)
      throw ParseError(where + ": expected 'name value'");
    if (toks[0] == "status") {
      s.status = toks[1];
    } else if (toks[0] == "objective") {
      s.objective = parse_num(toks[1], where);
      s.has_objective = true;
    } else {
      s.values.push_back({toks[0], parse_num(toks[1], where)});
    }
  }
  return s;
}

std::vector<double> solution_vector(const milp::MilpProblem& p,
                                    const SolutionFile& s) {
  std::map<std::string, int> col_of;
  for (int c = 0; c < static_cast<int>(p.col_names.size()); ++c)
    col_of[p.col_names[c]] = c;
  std::vector<double> x(p.ncols);
  for (int c = 0; c < p.ncols; ++c)
    x[c] = std::min(std::max(0.0, p.lb[c]), p.ub[c]);
  for (const auto& [name, v] : s.values) {
    const auto it = col_of.find(name);
    if (it != col_of.end()) x[it->second] = v;
  }
  return x;
}

}  // namespace dcuc::mps
