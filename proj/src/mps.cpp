#include "stsp/mps.hpp"

#include <charconv>
#include <cmath>
#include <cstddef>
#include <set>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "stsp/common.hpp"

namespace stsp {

namespace {

// Names the exporter itself uses as row/vector labels; a model name equal to
// one of these would collide, so it gets mangled like an over-long name.
const std::set<std::string>& reserved_names() {
  static const std::set<std::string> kReserved = {"COST", "RHS", "BND", "MARKER"};
  return kReserved;
}

std::string fmt_num(double v) {
  if (v == 0.0) return "0";  // normalizes -0
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_num(const std::string& tok, int line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError(line, "bad number '" + tok + "'");
  }
  return v;
}

// Appends a token starting at 1-based column `col`; if the line has already
// grown past that column the token follows after a single space instead.
void put(std::string& line, std::size_t col, const std::string& tok) {
  if (line.size() < col - 1) {
    line.resize(col - 1, ' ');
  } else if (!line.empty()) {
    line += ' ';
  }
  line += tok;
}

// Fixed-format field starts: indicator, name, name, value.
constexpr std::size_t kF1 = 2;
constexpr std::size_t kF2 = 5;
constexpr std::size_t kF3 = 15;
constexpr std::size_t kF4 = 25;
constexpr std::size_t kF5 = 40;

class NameTable {
 public:
  // prefix is 'V' for columns, 'C' for rows.
  explicit NameTable(char prefix) : prefix_(prefix) {}

  void reserve_original(const std::string& name) {
    if (fits(name)) taken_.insert(name);
  }

  std::string assign(const std::string& name, std::map<std::string, std::string>* renamed) {
    if (fits(name)) return name;
    char buf[16];
    std::string candidate;
    do {
      std::snprintf(buf, sizeof(buf), "%c%07d", prefix_, next_++);
      candidate = buf;
    } while (taken_.count(candidate) != 0);
    taken_.insert(candidate);
    (*renamed)[candidate] = name;
    return candidate;
  }

 private:
  bool fits(const std::string& name) const {
    return name.size() <= 8 && reserved_names().count(name) == 0;
  }

  char prefix_;
  int next_ = 1;
  std::set<std::string> taken_;
};

}  // namespace

MpsResult export_mps(const MilpModel& model) {
  MpsResult out;

  // Two passes over each namespace: short names keep priority over the
  // sequential fallbacks so mangling never steals an existing name.
  NameTable var_table('V');
  NameTable row_table('C');
  row_table.reserve_original("COST");  // objective row, always present
  for (const Variable& v : model.variables()) var_table.reserve_original(v.name);
  for (const Constraint& c : model.constraints()) row_table.reserve_original(c.name);

  std::vector<std::string> var_names(model.n_vars());
  std::vector<std::string> row_names(model.n_constraints());
  for (int j = 0; j < model.n_vars(); ++j) {
    var_names[j] = var_table.assign(model.variable(j).name, &out.renamed);
  }
  for (int i = 0; i < model.n_constraints(); ++i) {
    row_names[i] = row_table.assign(model.constraint(i).name, &out.renamed);
  }

  std::ostringstream os;
  auto emit = [&os](const std::string& line) { os << line << '\n'; };
  auto line1 = [&emit](std::size_t c1, const std::string& t1) {
    std::string line;
    put(line, c1, t1);
    emit(line);
  };

  {
    std::string line = "NAME";
    put(line, kF3, "STSP");
    emit(line);
  }

  emit("OBJSENSE");
  line1(kF2, model.objective_sense() == ObjSense::kMax ? "MAX" : "MIN");

  emit("ROWS");
  {
    std::string line;
    put(line, kF1, "N");
    put(line, kF2, "COST");
    emit(line);
  }
  for (int i = 0; i < model.n_constraints(); ++i) {
    const Constraint& c = model.constraint(i);
    const char* sense = c.sense == RowSense::kLe ? "L" : c.sense == RowSense::kGe ? "G" : "E";
    std::string line;
    put(line, kF1, sense);
    put(line, kF2, row_names[i]);
    emit(line);
  }

  // Column-major view of the constraint matrix, rows in constraint order.
  std::vector<std::vector<RowEntry>> by_var(model.n_vars());
  for (int i = 0; i < model.n_constraints(); ++i) {
    for (const RowEntry& e : model.constraint(i).row) {
      by_var[e.var].push_back({i, e.coef});
    }
  }
  std::vector<double> obj_coef(model.n_vars(), 0.0);
  for (const RowEntry& e : model.objective()) obj_coef[e.var] = e.coef;

  emit("COLUMNS");
  bool in_int_block = false;
  int marker_seq = 0;
  auto set_int_block = [&](bool want) {
    if (want == in_int_block) return;
    char name[16];
    std::snprintf(name, sizeof(name), "M%07d", ++marker_seq);
    std::string line;
    put(line, kF2, name);
    put(line, kF3, "'MARKER'");
    put(line, kF5, want ? "'INTORG'" : "'INTEND'");
    emit(line);
    in_int_block = want;
  };
  for (int j = 0; j < model.n_vars(); ++j) {
    set_int_block(model.variable(j).kind != VarKind::kContinuous);
    std::size_t emitted = 0;
    auto entry = [&](const std::string& row, double coef) {
      std::string line;
      put(line, kF2, var_names[j]);
      put(line, kF3, row);
      put(line, kF4, fmt_num(coef));
      emit(line);
      ++emitted;
    };
    if (obj_coef[j] != 0.0) entry("COST", obj_coef[j]);
    for (const RowEntry& e : by_var[j]) entry(row_names[e.var], e.coef);
    // A column no line mentions would vanish on reparse; pin it with a
    // zero objective entry.
    if (emitted == 0) entry("COST", 0.0);
  }
  set_int_block(false);

  emit("RHS");
  for (int i = 0; i < model.n_constraints(); ++i) {
    if (model.constraint(i).rhs == 0.0) continue;
    std::string line;
    put(line, kF2, "RHS");
    put(line, kF3, row_names[i]);
    put(line, kF4, fmt_num(model.constraint(i).rhs));
    emit(line);
  }

  emit("RANGES");

  emit("BOUNDS");
  for (int j = 0; j < model.n_vars(); ++j) {
    const Variable& v = model.variable(j);
    auto bound = [&](const char* type, bool with_value, double value) {
      std::string line;
      put(line, kF1, type);
      put(line, kF2, "BND");
      put(line, kF3, var_names[j]);
      if (with_value) put(line, kF4, fmt_num(value));
      emit(line);
    };
    if (v.kind == VarKind::kBinary && v.lower == 0.0 && v.upper == 1.0) {
      bound("BV", false, 0.0);
      continue;
    }
    if (v.kind != VarKind::kContinuous) {
      // Integers and pinned binaries always carry both bounds so no reader
      // has to guess the post-INTORG default upper bound.
      if (v.lower <= -kInf) {
        bound("MI", false, 0.0);
      } else {
        bound("LO", true, v.lower);
      }
      if (v.upper >= kInf) {
        bound("PL", false, 0.0);
      } else {
        bound("UP", true, v.upper);
      }
      continue;
    }
    if (v.lower == v.upper) {
      bound("FX", true, v.lower);
      continue;
    }
    if (v.lower <= -kInf && v.upper >= kInf) {
      bound("FR", false, 0.0);
      continue;
    }
    if (v.lower <= -kInf) {
      bound("MI", false, 0.0);
    } else if (v.lower != 0.0) {
      bound("LO", true, v.lower);
    }
    if (v.upper < kInf) {
      bound("UP", true, v.upper);
    }
  }

  emit("ENDATA");
  out.text = os.str();
  return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) toks.push_back(line.substr(start, i - start));
  }
  return toks;
}

struct PendingVar {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::kContinuous;
  double obj = 0.0;
};

struct PendingRow {
  std::string name;
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
  std::vector<RowEntry> entries;
};

}  // namespace

MilpModel parse_mps(const std::string& text) {
  enum class Section { kNone, kName, kObjSense, kRows, kColumns, kRhs, kRanges, kBounds, kDone };
  Section section = Section::kNone;

  ObjSense obj_sense = ObjSense::kMin;
  std::string obj_row;
  bool have_obj_row = false;

  std::vector<PendingVar> vars;
  std::unordered_map<std::string, int> var_index;
  std::vector<PendingRow> rows;
  std::unordered_map<std::string, int> row_index;
  bool int_block = false;

  auto find_var = [&](const std::string& name, int line) -> PendingVar& {
    auto it = var_index.find(name);
    if (it == var_index.end()) throw ParseError(line, "unknown column '" + name + "'");
    return vars[it->second];
  };

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    if (section == Section::kDone) break;
    std::vector<std::string> toks = tokenize(raw);
    if (toks.empty()) continue;

    bool header = !raw.empty() && raw[0] != ' ' && raw[0] != '\t';
    if (header) {
      const std::string& kw = toks[0];
      if (kw == "NAME") {
        section = Section::kName;
      } else if (kw == "OBJSENSE") {
        section = Section::kObjSense;
      } else if (kw == "ROWS") {
        section = Section::kRows;
      } else if (kw == "COLUMNS") {
        if (!have_obj_row) throw ParseError(lineno, "COLUMNS before any N row");
        section = Section::kColumns;
      } else if (kw == "RHS") {
        section = Section::kRhs;
      } else if (kw == "RANGES") {
        section = Section::kRanges;
      } else if (kw == "BOUNDS") {
        section = Section::kBounds;
      } else if (kw == "ENDATA") {
        section = Section::kDone;
      } else {
        throw ParseError(lineno, "unknown section '" + kw + "'");
      }
      continue;
    }

    switch (section) {
      case Section::kNone:
        throw ParseError(lineno, "data before any section header");
      case Section::kName:
      case Section::kDone:
        break;
      case Section::kObjSense: {
        if (toks.size() != 1 || (toks[0] != "MIN" && toks[0] != "MAX")) {
          throw ParseError(lineno, "OBJSENSE expects MIN or MAX");
        }
        obj_sense = toks[0] == "MAX" ? ObjSense::kMax : ObjSense::kMin;
        break;
      }
      case Section::kRows: {
        if (toks.size() != 2) throw ParseError(lineno, "ROWS line needs a type and a name");
        const std::string& type = toks[0];
        const std::string& name = toks[1];
        if (type == "N") {
          if (have_obj_row) throw ParseError(lineno, "second objective row '" + name + "'");
          obj_row = name;
          have_obj_row = true;
          break;
        }
        RowSense sense;
        if (type == "L") {
          sense = RowSense::kLe;
        } else if (type == "G") {
          sense = RowSense::kGe;
        } else if (type == "E") {
          sense = RowSense::kEq;
        } else {
          throw ParseError(lineno, "unknown row type '" + type + "'");
        }
        if (row_index.count(name) != 0 || (have_obj_row && name == obj_row)) {
          throw ParseError(lineno, "duplicate row '" + name + "'");
        }
        row_index[name] = static_cast<int>(rows.size());
        rows.push_back({name, sense, 0.0, {}});
        break;
      }
      case Section::kColumns: {
        if (toks.size() >= 2 && toks[1] == "'MARKER'") {
          for (std::size_t t = 2; t < toks.size(); ++t) {
            if (toks[t] == "'INTORG'") int_block = true;
            if (toks[t] == "'INTEND'") int_block = false;
          }
          break;
        }
        if (toks.size() != 3 && toks.size() != 5) {
          throw ParseError(lineno, "COLUMNS line needs 1 or 2 row/value pairs");
        }
        const std::string& vname = toks[0];
        auto it = var_index.find(vname);
        int j;
        if (it == var_index.end()) {
          j = static_cast<int>(vars.size());
          var_index[vname] = j;
          PendingVar pv;
          pv.name = vname;
          pv.kind = int_block ? VarKind::kInteger : VarKind::kContinuous;
          vars.push_back(pv);
        } else {
          j = it->second;
        }
        for (std::size_t t = 1; t + 1 < toks.size(); t += 2) {
          double coef = parse_num(toks[t + 1], lineno);
          if (toks[t] == obj_row) {
            vars[j].obj += coef;
            continue;
          }
          auto rit = row_index.find(toks[t]);
          if (rit == row_index.end()) throw ParseError(lineno, "unknown row '" + toks[t] + "'");
          rows[rit->second].entries.push_back({j, coef});
        }
        break;
      }
      case Section::kRhs: {
        if (toks.size() != 3 && toks.size() != 5) {
          throw ParseError(lineno, "RHS line needs 1 or 2 row/value pairs");
        }
        for (std::size_t t = 1; t + 1 < toks.size(); t += 2) {
          if (toks[t] == obj_row) {
            throw ParseError(lineno, "objective constants are not supported");
          }
          auto rit = row_index.find(toks[t]);
          if (rit == row_index.end()) throw ParseError(lineno, "unknown row '" + toks[t] + "'");
          rows[rit->second].rhs = parse_num(toks[t + 1], lineno);
        }
        break;
      }
      case Section::kRanges:
        throw ParseError(lineno, "RANGES entries are not supported");
      case Section::kBounds: {
        if (toks.size() < 3) throw ParseError(lineno, "BOUNDS line needs a type, a set and a column");
        const std::string& type = toks[0];
        PendingVar& v = find_var(toks[2], lineno);
        bool with_value = type == "UP" || type == "LO" || type == "FX";
        if (with_value && toks.size() != 4) {
          throw ParseError(lineno, type + " bound needs a value");
        }
        if (!with_value && toks.size() != 3) {
          throw ParseError(lineno, type + " bound takes no value");
        }
        if (type == "UP") {
          v.upper = parse_num(toks[3], lineno);
        } else if (type == "LO") {
          v.lower = parse_num(toks[3], lineno);
        } else if (type == "FX") {
          v.lower = v.upper = parse_num(toks[3], lineno);
        } else if (type == "FR") {
          v.lower = -kInf;
          v.upper = kInf;
        } else if (type == "MI") {
          v.lower = -kInf;
        } else if (type == "PL") {
          v.upper = kInf;
        } else if (type == "BV") {
          v.kind = VarKind::kBinary;
        } else {
          throw ParseError(lineno, "unknown bound type '" + type + "'");
        }
        break;
      }
    }
  }
  if (section != Section::kDone) throw ParseError(lineno, "missing ENDATA");

  MilpModel model;
  for (const PendingVar& v : vars) {
    model.add_variable(v.name, v.lower, v.upper, v.kind);
  }
  for (const PendingRow& r : rows) {
    model.add_constraint(r.name, r.entries, r.sense, r.rhs);
  }
  std::vector<RowEntry> obj;
  for (int j = 0; j < static_cast<int>(vars.size()); ++j) {
    if (vars[j].obj != 0.0) obj.push_back({j, vars[j].obj});
  }
  model.set_objective(std::move(obj), obj_sense);
  return model;
}

}  // namespace stsp
