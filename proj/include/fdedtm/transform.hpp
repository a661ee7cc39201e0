#pragma once

// Coefficient-by-coefficient transform of an expression that may contain the
// unknown. The expression is flattened into a tape of nodes; every node keeps
// the stream of coefficients computed so far, so requesting index k only
// costs the convolutions for that index. Products follow the Cauchy rule and
// powers are expanded into repeated products.

#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fdedtm/analysis.hpp"
#include "fdedtm/error.hpp"
#include "fdedtm/expression.hpp"
#include "fdedtm/series.hpp"

namespace fdedtm {

/// Known series substituted for u^(deriv)(t - delay), expanded about the context center.
struct HistoryBinding {
  DelayedTerm term;
  TaylorSeries series;
};

/// Everything the transform of a right-hand side needs at one expansion point:
/// the partially known coefficients U(0..K) of the unknown and the bound
/// series for each delayed term.
struct TransformContext {
  double center = 0.0;
  std::vector<double> unknown;
  std::vector<HistoryBinding> histories;

  const TaylorSeries* find_history(int deriv, double delay) const {
    for (const auto& h : histories)
      if (h.term.deriv == deriv && std::abs(h.term.delay - delay) < kDelayTolerance) return &h.series;
    return nullptr;
  }
};

class CoefficientTape {
 public:
  explicit CoefficientTape(const Expression& e) { root_ = compile(e.ptr()); }

  /// k-th transform coefficient; indices below k are filled in first.
  double coefficient(int k, const TransformContext& ctx) {
    if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative coefficient index");
    while (computed_ <= k) {
      // all failure modes are checked up front so a throw leaves the streams intact
      for (const auto& node : nodes_) check_ready(node, computed_, ctx);
      for (auto& node : nodes_) step(node, computed_, ctx);
      ++computed_;
    }
    return nodes_[root_].stream[static_cast<std::size_t>(k)];
  }

  int computed() const noexcept { return computed_; }

 private:
  enum class Op { Constant, Time, Unknown, Delayed, Func, Neg, Add, Sub, Mul, Div, Pow };

  struct Node {
    Op op;
    int lhs = -1;
    int rhs = -1;
    int deriv = 0;
    double delay = 0.0;
    double value = 0.0;  // constant, denominator
    int exponent = 0;
    FuncKind func = FuncKind::Exp;
    double lambda = 0.0;
    double mu = 0.0;
    double func_scale = 1.0;  // lambda^k / k! for the next k
    std::vector<double> stream{};
    std::vector<std::vector<double>> partial_powers{};  // base^2 .. base^exponent
  };

  std::vector<Node> nodes_;
  std::unordered_map<const ast::Node*, int> index_;
  int root_ = 0;
  int computed_ = 0;

  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int compile(const ast::NodePtr& p) {
    if (auto it = index_.find(p.get()); it != index_.end()) return it->second;
    const int id = std::visit(
        detail::overloaded{
            [&](const ast::Constant& c) { return push({.op = Op::Constant, .value = c.value}); },
            [&](const ast::TimeVar&) { return push({.op = Op::Time}); },
            [&](const ast::Unknown& u) {
              const Op op = detail::is_undelayed(u.delay) ? Op::Unknown : Op::Delayed;
              return push({.op = op, .deriv = u.deriv, .delay = u.delay});
            },
            [&](const ast::Func& f) {
              return push({.op = Op::Func, .func = f.kind, .lambda = f.lambda, .mu = f.mu});
            },
            [&](const ast::Neg& n) { return push({.op = Op::Neg, .lhs = compile(n.arg)}); },
            [&](const ast::Add& n) { return push({.op = Op::Add, .lhs = compile(n.lhs), .rhs = compile(n.rhs)}); },
            [&](const ast::Sub& n) { return push({.op = Op::Sub, .lhs = compile(n.lhs), .rhs = compile(n.rhs)}); },
            [&](const ast::Mul& n) { return push({.op = Op::Mul, .lhs = compile(n.lhs), .rhs = compile(n.rhs)}); },
            [&](const ast::Div& n) { return push({.op = Op::Div, .lhs = compile(n.num), .value = n.denom}); },
            [&](const ast::IntPow& n) {
              // u^0 is the constant 1 and must not demand coefficients of u
              if (n.exponent == 0) return push({.op = Op::Constant, .value = 1.0});
              Node node{.op = Op::Pow, .lhs = compile(n.base), .exponent = n.exponent};
              if (n.exponent >= 2) node.partial_powers.resize(static_cast<std::size_t>(n.exponent) - 1);
              return push(std::move(node));
            },
        },
        p->data);
    index_.emplace(p.get(), id);
    return id;
  }

  static double convolve(const std::vector<double>& a, const std::vector<double>& b, int k) {
    double acc = 0.0;
    for (int l = 0; l <= k; ++l) acc += a[l] * b[k - l];
    return acc;
  }

  static void check_ready(const Node& node, int k, const TransformContext& ctx) {
    if (node.op == Op::Unknown) {
      const int idx = k + node.deriv;
      if (idx >= static_cast<int>(ctx.unknown.size()))
        throw Error(ErrorKind::CoefficientNotReady,
                    "U(" + std::to_string(idx) + ") is not known yet (have " +
                        std::to_string(ctx.unknown.size()) + ")");
    } else if (node.op == Op::Delayed) {
      const TaylorSeries* h = ctx.find_history(node.deriv, node.delay);
      if (h == nullptr)
        throw Error(ErrorKind::MissingHistory, "no series bound for u^(" + std::to_string(node.deriv) +
                                                   ")(t-" + std::to_string(node.delay) + ")");
      if (k > h->order())
        throw Error(ErrorKind::CoefficientNotReady, "bound history series has order " +
                                                        std::to_string(h->order()) + ", need " +
                                                        std::to_string(k));
    }
  }

  void step(Node& node, int k, const TransformContext& ctx) {
    auto child = [&](int id) -> const std::vector<double>& { return nodes_[id].stream; };
    double value = 0.0;
    switch (node.op) {
      case Op::Constant:
        value = k == 0 ? node.value : 0.0;
        break;
      case Op::Time:
        value = k == 0 ? ctx.center : k == 1 ? 1.0 : 0.0;
        break;
      case Op::Unknown:
        value = detail::rising_factor<double>(k, node.deriv) * ctx.unknown[k + node.deriv];
        break;
      case Op::Delayed:
        value = (*ctx.find_history(node.deriv, node.delay))[k];
        break;
      case Op::Func: {
        const double theta = node.lambda * ctx.center + node.mu;
        double base = 0.0;
        if (node.func == FuncKind::Exp) {
          base = std::exp(theta);
        } else {
          const int phase = (k + (node.func == FuncKind::Cos ? 1 : 0)) % 4;
          const double s = std::sin(theta);
          const double c = std::cos(theta);
          base = phase == 0 ? s : phase == 1 ? c : phase == 2 ? -s : -c;
        }
        value = node.func_scale * base;
        node.func_scale *= node.lambda / static_cast<double>(k + 1);
        break;
      }
      case Op::Neg:
        value = -child(node.lhs)[k];
        break;
      case Op::Add:
        value = child(node.lhs)[k] + child(node.rhs)[k];
        break;
      case Op::Sub:
        value = child(node.lhs)[k] - child(node.rhs)[k];
        break;
      case Op::Mul:
        value = convolve(child(node.lhs), child(node.rhs), k);
        break;
      case Op::Div:
        value = child(node.lhs)[k] / node.value;
        break;
      case Op::Pow: {
        if (node.exponent == 0) {
          value = k == 0 ? 1.0 : 0.0;
          break;
        }
        const auto& base = child(node.lhs);
        if (node.exponent == 1) {
          value = base[k];
          break;
        }
        const std::vector<double>* prev = &base;
        for (auto& power : node.partial_powers) {
          power.push_back(convolve(*prev, base, k));
          prev = &power;
        }
        value = prev->back();
        break;
      }
    }
    node.stream.push_back(value);
  }
};

/// k-th transform coefficient of `e` under `ctx`.
inline double transform_coefficient(const Expression& e, int k, const TransformContext& ctx) {
  CoefficientTape tape(e);
  return tape.coefficient(k, ctx);
}

}  // namespace fdedtm
