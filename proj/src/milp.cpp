#include "stsp/milp.hpp"

#include <algorithm>
#include <cmath>

namespace stsp {

int MilpModel::add_variable(const std::string& name, double lower, double upper,
                            VarKind kind) {
  if (name.empty()) throw Error("variable name must not be empty");
  if (!var_names_.emplace(name, n_vars()).second) {
    throw Error("duplicate variable name '" + name + "'");
  }
  if (std::isnan(lower) || std::isnan(upper)) {
    throw Error("NaN bound on variable '" + name + "'");
  }
  // Binaries live in the unit box, but tighter caller bounds survive so a
  // variable can be pinned to one value.
  if (kind == VarKind::kBinary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  vars_.push_back({name, lower, upper, kind});
  return n_vars() - 1;
}

std::vector<RowEntry> MilpModel::canonicalize(std::vector<RowEntry> row,
                                              const char* where) const {
  for (const RowEntry& entry : row) {
    if (entry.var < 0 || entry.var >= n_vars()) {
      throw Error(std::string(where) + " references unknown variable index " +
                  std::to_string(entry.var));
    }
    if (!std::isfinite(entry.coef) || std::abs(entry.coef) >= kInf) {
      throw Error(std::string(where) + " has a non-finite coefficient");
    }
  }
  std::sort(row.begin(), row.end(),
            [](const RowEntry& a, const RowEntry& b) { return a.var < b.var; });
  std::vector<RowEntry> out;
  for (const RowEntry& entry : row) {
    if (!out.empty() && out.back().var == entry.var) {
      out.back().coef += entry.coef;
    } else {
      out.push_back(entry);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const RowEntry& e) { return e.coef == 0.0; }),
            out.end());
  return out;
}

int MilpModel::add_constraint(const std::string& name, std::vector<RowEntry> row,
                              RowSense sense, double rhs) {
  if (name.empty()) throw Error("constraint name must not be empty");
  if (!row_names_.emplace(name, n_constraints()).second) {
    throw Error("duplicate constraint name '" + name + "'");
  }
  if (std::isnan(rhs) || std::abs(rhs) >= kInf) {
    throw Error("non-finite right-hand side on constraint '" + name + "'");
  }
  rows_.push_back({name, canonicalize(std::move(row), "constraint"), sense, rhs});
  return n_constraints() - 1;
}

void MilpModel::set_objective(std::vector<RowEntry> row, ObjSense sense) {
  objective_ = canonicalize(std::move(row), "objective");
  obj_sense_ = sense;
}

void MilpModel::set_provenance(const std::string& tag, std::uint64_t fingerprint) {
  tag_ = tag;
  fingerprint_ = fingerprint;
}

int MilpModel::var_index(const std::string& name) const {
  auto it = var_names_.find(name);
  if (it == var_names_.end()) throw Error("unknown variable '" + name + "'");
  return it->second;
}

bool MilpModel::any_integer() const {
  return std::any_of(vars_.begin(), vars_.end(), [](const Variable& v) {
    return v.kind != VarKind::kContinuous;
  });
}

ModelStats model_stats(const MilpModel& model) {
  ModelStats stats;
  stats.n_vars = model.n_vars();
  stats.n_constraints = model.n_constraints();
  for (const Constraint& c : model.constraints()) {
    stats.n_nonzeros += static_cast<long long>(c.row.size());
  }
  return stats;
}

}  // namespace stsp
