#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace crashsynth {

class ConstraintSet;

// Immutable polynomial expression over solver variables. Supports the
// arithmetic the trajectory relations need (+, -, *); printing is stable so
// constraint dumps are reproducible.
class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}
  static Expr constant(double v);
  static Expr variable(int index);

  double eval(const std::vector<double>& values) const;
  void collect_variables(std::set<int>& out) const;
  std::string str(const ConstraintSet& set) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  enum class Op { Const, Var, Add, Sub, Mul, Neg };
  struct Node {
    Op op = Op::Const;
    double value = 0.0;
    int index = -1;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
  };
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static double eval_node(const Node* n, const std::vector<double>& values);
  static void collect_node(const Node* n, std::set<int>& out);
  static std::string str_node(const Node* n, const ConstraintSet& set);
  std::shared_ptr<const Node> node_;
};

inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }

enum class RelationKind {
  Equality,    // expr == 0 within the equality tolerance
  Inequality,  // expr >= 0, strictly (positive margin required)
};

struct RelationTag {
  int group = 0;             // constraint group 1..5
  std::string participant;   // participant id, empty for global relations
  std::string action;        // action name, snake case, or "crash"/"chain"
  std::string label;         // short relation name for diagnostics
  bool extrapolated = false; // true for catalog relations beyond the core set
};

struct Relation {
  RelationKind kind = RelationKind::Equality;
  Expr expr;
  RelationTag tag;
  std::vector<int> variables;  // cached dependency list
};

struct VariableInfo {
  std::string name;
  double lower = -1e9;
  double upper = 1e9;
  double seed = 0.0;   // structure-aware initial guess
  double jitter = 1.0; // restart perturbation scale
};

class ConstraintSet {
 public:
  explicit ConstraintSet(std::string name = "") : name_(std::move(name)) {}

  int add_variable(const std::string& name, double lower, double upper, double seed,
                   double jitter = 1.0);
  Expr var(int index) const;

  void add_equality(Expr e, RelationTag tag);
  void add_inequality(Expr e, RelationTag tag);

  const std::string& name() const { return name_; }
  const std::vector<VariableInfo>& variables() const { return variables_; }
  std::vector<VariableInfo>& variables() { return variables_; }
  const std::vector<Relation>& relations() const { return relations_; }

  // One line per relation: "group<id> participant<id> action<name>: <relation>".
  std::string dump() const;

 private:
  std::string name_;
  std::vector<VariableInfo> variables_;
  std::vector<Relation> relations_;
};

}  // namespace crashsynth
