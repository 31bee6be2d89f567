#include "crashsynth/constraint_set.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crashsynth/errors.hpp"

namespace crashsynth {

Expr Expr::constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::variable(int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->index = index;
  return Expr(std::move(n));
}

double Expr::eval_node(const Node* n, const std::vector<double>& values) {
  switch (n->op) {
    case Op::Const: return n->value;
    case Op::Var: return values[static_cast<std::size_t>(n->index)];
    case Op::Add: return eval_node(n->a.get(), values) + eval_node(n->b.get(), values);
    case Op::Sub: return eval_node(n->a.get(), values) - eval_node(n->b.get(), values);
    case Op::Mul: return eval_node(n->a.get(), values) * eval_node(n->b.get(), values);
    case Op::Neg: return -eval_node(n->a.get(), values);
  }
  return 0.0;
}

double Expr::eval(const std::vector<double>& values) const { return eval_node(node_.get(), values); }

void Expr::collect_node(const Node* n, std::set<int>& out) {
  switch (n->op) {
    case Op::Const: return;
    case Op::Var: out.insert(n->index); return;
    case Op::Neg: collect_node(n->a.get(), out); return;
    default:
      collect_node(n->a.get(), out);
      collect_node(n->b.get(), out);
  }
}

void Expr::collect_variables(std::set<int>& out) const { collect_node(node_.get(), out); }

namespace {

std::string format_number(double v) {
  std::ostringstream ss;
  ss.precision(9);
  ss << v;
  return ss.str();
}

}  // namespace

std::string Expr::str_node(const Node* n, const ConstraintSet& set) {
  switch (n->op) {
    case Op::Const: return format_number(n->value);
    case Op::Var: return set.variables()[static_cast<std::size_t>(n->index)].name;
    case Op::Add: return "(" + str_node(n->a.get(), set) + " + " + str_node(n->b.get(), set) + ")";
    case Op::Sub: return "(" + str_node(n->a.get(), set) + " - " + str_node(n->b.get(), set) + ")";
    case Op::Mul: return "(" + str_node(n->a.get(), set) + " * " + str_node(n->b.get(), set) + ")";
    case Op::Neg: return "(-" + str_node(n->a.get(), set) + ")";
  }
  return "0";
}

std::string Expr::str(const ConstraintSet& set) const { return str_node(node_.get(), set); }

Expr operator+(const Expr& a, const Expr& b) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Expr::Op::Add;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Expr::Op::Sub;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr operator*(const Expr& a, const Expr& b) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Expr::Op::Mul;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr operator-(const Expr& a) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Expr::Op::Neg;
  n->a = a.node_;
  return Expr(std::move(n));
}

int ConstraintSet::add_variable(const std::string& name, double lower, double upper, double seed,
                                double jitter) {
  if (lower > upper) {
    throw SemanticError("variable '" + name + "' has empty bounds [" + std::to_string(lower) +
                        ", " + std::to_string(upper) + "]");
  }
  VariableInfo info;
  info.name = name;
  info.lower = lower;
  info.upper = upper;
  info.seed = std::clamp(seed, lower, upper);
  info.jitter = jitter;
  variables_.push_back(std::move(info));
  return static_cast<int>(variables_.size()) - 1;
}

Expr ConstraintSet::var(int index) const {
  if (index < 0 || index >= static_cast<int>(variables_.size())) {
    throw SemanticError("variable index " + std::to_string(index) + " out of range");
  }
  return Expr::variable(index);
}

void ConstraintSet::add_equality(Expr e, RelationTag tag) {
  Relation r;
  r.kind = RelationKind::Equality;
  r.expr = std::move(e);
  r.tag = std::move(tag);
  std::set<int> deps;
  r.expr.collect_variables(deps);
  r.variables.assign(deps.begin(), deps.end());
  relations_.push_back(std::move(r));
}

void ConstraintSet::add_inequality(Expr e, RelationTag tag) {
  Relation r;
  r.kind = RelationKind::Inequality;
  r.expr = std::move(e);
  r.tag = std::move(tag);
  std::set<int> deps;
  r.expr.collect_variables(deps);
  r.variables.assign(deps.begin(), deps.end());
  relations_.push_back(std::move(r));
}

std::string ConstraintSet::dump() const {
  std::ostringstream out;
  for (const Relation& r : relations_) {
    out << "group" << r.tag.group;
    out << " participant=" << (r.tag.participant.empty() ? "*" : r.tag.participant);
    out << " action=" << (r.tag.action.empty() ? "*" : r.tag.action);
    out << ": " << r.expr.str(*this) << (r.kind == RelationKind::Equality ? " = 0" : " >= 0");
    if (!r.tag.label.empty()) out << "  # " << r.tag.label;
    if (r.tag.extrapolated) out << " (extrapolated)";
    out << "\n";
  }
  return out.str();
}

}  // namespace crashsynth
