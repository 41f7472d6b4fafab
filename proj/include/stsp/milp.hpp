#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stsp/common.hpp"

namespace stsp {

enum class VarKind { kContinuous, kBinary, kInteger };
enum class RowSense { kLe, kGe, kEq };
enum class ObjSense { kMin, kMax };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::kContinuous;
};

struct RowEntry {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<RowEntry> row;  // sorted by var index, zero-free
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
};

struct ModelStats {
  int n_vars = 0;
  int n_constraints = 0;
  // Constraint-matrix nonzeros; objective entries not included.
  long long n_nonzeros = 0;
};

// Formulation-agnostic model. Rows are stored constraint-major and
// canonicalized on insertion (entries merged, zeros dropped, sorted).
class MilpModel {
 public:
  int add_variable(const std::string& name, double lower, double upper, VarKind kind);
  int add_constraint(const std::string& name, std::vector<RowEntry> row, RowSense sense,
                     double rhs);
  void set_objective(std::vector<RowEntry> row, ObjSense sense);
  void set_provenance(const std::string& tag, std::uint64_t fingerprint);

  int n_vars() const { return static_cast<int>(vars_.size()); }
  int n_constraints() const { return static_cast<int>(rows_.size()); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const Variable& variable(int j) const { return vars_.at(j); }
  const Constraint& constraint(int i) const { return rows_.at(i); }
  const std::vector<RowEntry>& objective() const { return objective_; }
  ObjSense objective_sense() const { return obj_sense_; }

  // Index of a named variable; throws when absent.
  int var_index(const std::string& name) const;
  bool has_var(const std::string& name) const { return var_names_.count(name) != 0; }

  bool any_integer() const;
  const std::string& tag() const { return tag_; }
  std::uint64_t instance_fingerprint() const { return fingerprint_; }

 private:
  std::vector<RowEntry> canonicalize(std::vector<RowEntry> row, const char* where) const;

  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<RowEntry> objective_;
  ObjSense obj_sense_ = ObjSense::kMin;
  std::map<std::string, int> var_names_;
  std::map<std::string, int> row_names_;
  std::string tag_;
  std::uint64_t fingerprint_ = 0;
};

ModelStats model_stats(const MilpModel& model);

}  // namespace stsp
