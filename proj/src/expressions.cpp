#include "warpfield/expressions.hpp"

#include <cmath>



namespace warpfield::expr {

namespace {

ExprPtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

bool is_const_val(const ExprPtr& e, Complex c) {
  return e->kind == Kind::Const && e->value == c;
}

}  // namespace

ExprPtr constant(Complex c) {
  Node n;
  n.kind = Kind::Const;
  n.value = c;
  return make(std::move(n));
}

ExprPtr constant(double c) { return constant(Complex(c, 0.0)); }

ExprPtr var(int index) {
  require(index >= 0, "expr::var: negative index");
  Node n;
  n.kind = Kind::Var;
  n.var = index;
  return make(std::move(n));
}

ExprPtr add(std::vector<ExprPtr> terms) {
  std::vector<ExprPtr> flat;
  Complex c = 0.0;
  for (auto& t : terms) {
    require(t != nullptr, "expr::add: null child");
    if (t->kind == Kind::Add) {
      for (auto& u : t->args) {
        if (u->kind == Kind::Const) c += u->value;
        else flat.push_back(u);
      }
    } else if (t->kind == Kind::Const) {
      c += t->value;
    } else {
      flat.push_back(t);
    }
  }
  if (c != Complex(0.0)) flat.push_back(constant(c));
  if (flat.empty()) return constant(0.0);
  if (flat.size() == 1) return flat[0];
  Node n;
  n.kind = Kind::Add;
  n.args = std::move(flat);
  return make(std::move(n));
}

ExprPtr mul(std::vector<ExprPtr> factors) {
  std::vector<ExprPtr> flat;
  Complex c = 1.0;
  for (auto& t : factors) {
    require(t != nullptr, "expr::mul: null child");
    if (t->kind == Kind::Mul) {
      for (auto& u : t->args) {
        if (u->kind == Kind::Const) c *= u->value;
        else flat.push_back(u);
      }
    } else if (t->kind == Kind::Const) {
      c *= t->value;
    } else {
      flat.push_back(t);
    }
  }
  if (c == Complex(0.0)) return constant(0.0);
  if (c != Complex(1.0)) flat.insert(flat.begin(), constant(c));
  if (flat.empty()) return constant(1.0);
  if (flat.size() == 1) return flat[0];
  Node n;
  n.kind = Kind::Mul;
  n.args = std::move(flat);
  return make(std::move(n));
}

ExprPtr neg(ExprPtr a) {
  if (a->kind == Kind::Const) return constant(-a->value);
  Node n;
  n.kind = Kind::Neg;
  n.args = {std::move(a)};
  return make(std::move(n));
}

ExprPtr sub(ExprPtr a, ExprPtr b) { return add({std::move(a), neg(std::move(b))}); }

ExprPtr pow(ExprPtr base, long p) {
  require(p >= 0, "expr::pow: negative integer exponent (use div/rpow)");
  if (p == 0) return constant(1.0);
  if (p == 1) return base;
  if (base->kind == Kind::Const) return constant(std::pow(base->value, double(p)));
  Node n;
  n.kind = Kind::Pow;
  n.ipow = p;
  n.args = {std::move(base)};
  return make(std::move(n));
}

ExprPtr rpow(ExprPtr base, double p) {
  if (p == 0.0) return constant(1.0);
  if (p == 1.0) return base;
  Node n;
  n.kind = Kind::RPow;
  n.rpow = p;
  n.args = {std::move(base)};
  return make(std::move(n));
}

ExprPtr exp(ExprPtr a) {
  if (a->kind == Kind::Const) return constant(std::exp(a->value));
  Node n;
  n.kind = Kind::Exp;
  n.args = {std::move(a)};
  return make(std::move(n));
}

ExprPtr sin(ExprPtr a) {
  Node n;
  n.kind = Kind::Sin;
  n.args = {std::move(a)};
  return make(std::move(n));
}

ExprPtr cos(ExprPtr a) {
  Node n;
  n.kind = Kind::Cos;
  n.args = {std::move(a)};
  return make(std::move(n));
}

ExprPtr div(ExprPtr num, ExprPtr den) {
  if (is_zero(num)) return constant(0.0);
  if (is_const_val(den, Complex(1.0))) return num;
  if (num->kind == Kind::Const && den->kind == Kind::Const)
    return constant(num->value / den->value);
  Node n;
  n.kind = Kind::Div;
  n.args = {std::move(num), std::move(den)};
  return make(std::move(n));
}

ExprPtr bump(std::vector<int> vars, VecD center, double radius) {
  require(!vars.empty() && vars.size() == center.size(), "expr::bump: vars/center mismatch");
  require(radius > 0, "expr::bump: radius must be positive");
  Node n;
  n.kind = Kind::Bump;
  n.bump_vars = std::move(vars);
  n.bump_center = std::move(center);
  n.bump_radius = radius;
  return make(std::move(n));
}

Complex eval(const ExprPtr& e, const double* x, int n) {
  switch (e->kind) {
    case Kind::Const:
      return e->value;
    case Kind::Var:
      require(e->var < n, "expr::eval: variable index out of range");
      return Complex(x[e->var], 0.0);
    case Kind::Add: {
      Complex s = 0;
      for (auto& a : e->args) s += eval(a, x, n);
      return s;
    }
    case Kind::Mul: {
      // short-circuit on exact zero: keeps products like bump * rational finite
      // outside the bump support where the rational factor blows up
      Complex p = 1.0;
      for (auto& a : e->args) {
        Complex v = eval(a, x, n);
        if (v == Complex(0.0)) return Complex(0.0);
        p *= v;
      }
      return p;
    }
    case Kind::Neg:
      return -eval(e->args[0], x, n);
    case Kind::Pow: {
      Complex b = eval(e->args[0], x, n);
      Complex r = 1.0;
      Complex base = b;
      long p = e->ipow;
      while (p > 0) {
        if (p & 1) r *= base;
        base *= base;
        p >>= 1;
      }
      return r;
    }
    case Kind::RPow: {
      Complex b = eval(e->args[0], x, n);
      require(b.imag() == 0.0 && b.real() > 0.0, "expr::eval: rpow base must be positive real");
      return Complex(std::pow(b.real(), e->rpow), 0.0);
    }
    case Kind::Exp:
      return std::exp(eval(e->args[0], x, n));
    case Kind::Sin:
      return std::sin(eval(e->args[0], x, n));
    case Kind::Cos:
      return std::cos(eval(e->args[0], x, n));
    case Kind::Div: {
      Complex num = eval(e->args[0], x, n);
      if (num == Complex(0.0)) return Complex(0.0);
      return num / eval(e->args[1], x, n);
    }
    case Kind::Bump: {
      double u = 0;
      for (size_t i = 0; i < e->bump_vars.size(); ++i) {
        require(e->bump_vars[i] < n, "expr::eval: bump variable out of range");
        double t = (x[e->bump_vars[i]] - e->bump_center[i]) / e->bump_radius;
        u += t * t;
      }
      if (u >= 1.0) return Complex(0.0);
      return Complex(std::exp(1.0 - 1.0 / (1.0 - u)), 0.0);
    }
  }
  throw EvaluationError("expr::eval: unreachable");
}

ExprPtr derivative(const ExprPtr& e, int v) {
  switch (e->kind) {
    case Kind::Const:
      return constant(0.0);
    case Kind::Var:
      return constant(e->var == v ? 1.0 : 0.0);
    case Kind::Add: {
      std::vector<ExprPtr> d;
      for (auto& a : e->args) d.push_back(derivative(a, v));
      return add(std::move(d));
    }
    case Kind::Mul: {
      std::vector<ExprPtr> terms;
      for (size_t i = 0; i < e->args.size(); ++i) {
        ExprPtr di = derivative(e->args[i], v);
        if (is_zero(di)) continue;
        std::vector<ExprPtr> fs;
        // keep non-differentiated bump factors first so the zero short-circuit
        // guards rational blow-ups at the support boundary
        for (size_t j = 0; j < e->args.size(); ++j)
          if (j != i && e->args[j]->kind == Kind::Bump) fs.push_back(e->args[j]);
        fs.push_back(di);
        for (size_t j = 0; j < e->args.size(); ++j)
          if (j != i && e->args[j]->kind != Kind::Bump) fs.push_back(e->args[j]);
        terms.push_back(mul(std::move(fs)));
      }
      return add(std::move(terms));
    }
    case Kind::Neg:
      return neg(derivative(e->args[0], v));
    case Kind::Pow: {
      ExprPtr d = derivative(e->args[0], v);
      if (is_zero(d)) return constant(0.0);
      return mul({constant(double(e->ipow)), pow(e->args[0], e->ipow - 1), d});
    }
    case Kind::RPow: {
      ExprPtr d = derivative(e->args[0], v);
      if (is_zero(d)) return constant(0.0);
      return mul({constant(e->rpow), rpow(e->args[0], e->rpow - 1.0), d});
    }
    case Kind::Exp: {
      ExprPtr d = derivative(e->args[0], v);
      if (is_zero(d)) return constant(0.0);
      return mul({e, d});
    }
    case Kind::Sin: {
      ExprPtr d = derivative(e->args[0], v);
      if (is_zero(d)) return constant(0.0);
      return mul({cos(e->args[0]), d});
    }
    case Kind::Cos: {
      ExprPtr d = derivative(e->args[0], v);
      if (is_zero(d)) return constant(0.0);
      return neg(mul({sin(e->args[0]), d}));
    }
    case Kind::Div: {
      ExprPtr dn = derivative(e->args[0], v);
      ExprPtr dd = derivative(e->args[1], v);
      if (is_zero(dd)) return div(dn, e->args[1]);
      // f'/g - f g'/g²
      return sub(div(dn, e->args[1]), div(mul({e->args[0], dd}), pow(e->args[1], 2)));
    }
    case Kind::Bump: {
      // B = exp(1 - 1/(1-u)); ∂B/∂x_v = B · (-1/(1-u)²) · ∂u/∂x_v
      int idx = -1;
      for (size_t i = 0; i < e->bump_vars.size(); ++i)
        if (e->bump_vars[i] == v) idx = int(i);
      if (idx < 0) return constant(0.0);
      double r2 = e->bump_radius * e->bump_radius;
      // u as an expression
      std::vector<ExprPtr> uterms;
      for (size_t i = 0; i < e->bump_vars.size(); ++i) {
        ExprPtr t = sub(var(e->bump_vars[i]), constant(e->bump_center[i]));
        uterms.push_back(mul({constant(1.0 / r2), pow(t, 2)}));
      }
      ExprPtr u = add(std::move(uterms));
      ExprPtr one_minus_u = sub(constant(1.0), u);
      ExprPtr du = mul({constant(2.0 / r2), sub(var(v), constant(e->bump_center[idx]))});
      // bump factor FIRST: the zero short-circuit in Mul guards the pole at u = 1
      return mul({e, neg(div(du, pow(one_minus_u, 2)))});
    }
  }
  throw EvaluationError("expr::derivative: unreachable");
}

bool is_zero(const ExprPtr& e) { return e->kind == Kind::Const && e->value == Complex(0.0); }

bool is_constant(const ExprPtr& e) { return e->kind == Kind::Const; }

int max_var_index(const ExprPtr& e) {
  int m = -1;
  if (e->kind == Kind::Var) m = e->var;
  if (e->kind == Kind::Bump)
    for (int v : e->bump_vars) m = std::max(m, v);
  for (auto& a : e->args) m = std::max(m, max_var_index(a));
  return m;
}

void collect_vars(const ExprPtr& e, std::vector<bool>& used) {
  if (e->kind == Kind::Var) {
    if (e->var < int(used.size())) used[e->var] = true;
    return;
  }
  if (e->kind == Kind::Bump)
    for (int v : e->bump_vars)
      if (v < int(used.size())) used[v] = true;
  for (auto& a : e->args) collect_vars(a, used);
}

ExprPtr remap_vars(const ExprPtr& e, const std::vector<int>& map) {
  switch (e->kind) {
    case Kind::Const:
      return e;
    case Kind::Var: {
      require(e->var < int(map.size()) && map[e->var] >= 0, "remap_vars: unmapped variable");
      return var(map[e->var]);
    }
    case Kind::Bump: {
      std::vector<int> nv;
      for (int v : e->bump_vars) {
        require(v < int(map.size()) && map[v] >= 0, "remap_vars: unmapped bump variable");
        nv.push_back(map[v]);
      }
      return bump(std::move(nv), e->bump_center, e->bump_radius);
    }
    default: {
      Node n = *e;
      n.args.clear();
      for (auto& a : e->args) n.args.push_back(remap_vars(a, map));
      return make(std::move(n));
    }
  }
}

ExprPtr shift(const ExprPtr& e, const VecD& offsets) {
  switch (e->kind) {
    case Kind::Const:
      return e;
    case Kind::Var: {
      require(e->var < int(offsets.size()), "shift: offset list too short");
      const double a = offsets[e->var];
      if (a == 0.0) return e;
      return sub(var(e->var), constant(a));
    }
    case Kind::Bump: {
      VecD c = e->bump_center;
      for (size_t i = 0; i < e->bump_vars.size(); ++i) {
        require(e->bump_vars[i] < int(offsets.size()), "shift: offset list too short");
        c[i] += offsets[e->bump_vars[i]];
      }
      return bump(e->bump_vars, std::move(c), e->bump_radius);
    }
    default: {
      Node n = *e;
      n.args.clear();
      for (auto& a : e->args) n.args.push_back(shift(a, offsets));
      return make(std::move(n));
    }
  }
}

ExprPtr conjugate(const ExprPtr& e) {
  switch (e->kind) {
    case Kind::Const:
      return constant(std::conj(e->value));
    case Kind::Var:
    case Kind::Bump:
      return e;
    default: {
      Node n = *e;
      n.args.clear();
      for (auto& a : e->args) n.args.push_back(conjugate(a));
      return make(std::move(n));
    }
  }
}

ExprPtr from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("op"), "expression: each node needs an \"op\" field");
  std::string op = j.at("op").get<std::string>();
  auto children = [&]() {
    std::vector<ExprPtr> out;
    for (auto& c : j.at("args")) out.push_back(from_json(c));
    return out;
  };
  if (op == "const") {
    double re = j.value("re", 0.0), im = j.value("im", 0.0);
    return constant(Complex(re, im));
  }
  if (op == "var") return var(j.at("index").get<int>());
  if (op == "add") return add(children());
  if (op == "mul") return mul(children());
  if (op == "neg") return neg(from_json(j.at("arg")));
  if (op == "pow") return pow(from_json(j.at("base")), j.at("exp").get<long>());
  if (op == "rpow") return rpow(from_json(j.at("base")), j.at("exp").get<double>());
  if (op == "exp") return exp(from_json(j.at("arg")));
  if (op == "sin") return sin(from_json(j.at("arg")));
  if (op == "cos") return cos(from_json(j.at("arg")));
  if (op == "div") return div(from_json(j.at("num")), from_json(j.at("den")));
  if (op == "bump") {
    std::vector<int> vars = j.at("vars").get<std::vector<int>>();
    VecD center = j.at("center").get<VecD>();
    return bump(std::move(vars), std::move(center), j.at("radius").get<double>());
  }
  throw SchemaError("expression: unknown op \"" + op + "\"");
}

nlohmann::json to_json(const ExprPtr& e) {
  nlohmann::json j;
  switch (e->kind) {
    case Kind::Const:
      j["op"] = "const";
      j["re"] = e->value.real();
      if (e->value.imag() != 0.0) j["im"] = e->value.imag();
      return j;
    case Kind::Var:
      j["op"] = "var";
      j["index"] = e->var;
      return j;
    case Kind::Add:
    case Kind::Mul: {
      j["op"] = e->kind == Kind::Add ? "add" : "mul";
      j["args"] = nlohmann::json::array();
      for (auto& a : e->args) j["args"].push_back(to_json(a));
      return j;
    }
    case Kind::Neg:
      j["op"] = "neg";
      j["arg"] = to_json(e->args[0]);
      return j;
    case Kind::Pow:
      j["op"] = "pow";
      j["base"] = to_json(e->args[0]);
      j["exp"] = e->ipow;
      return j;
    case Kind::RPow:
      j["op"] = "rpow";
      j["base"] = to_json(e->args[0]);
      j["exp"] = e->rpow;
      return j;
    case Kind::Exp:
      j["op"] = "exp";
      j["arg"] = to_json(e->args[0]);
      return j;
    case Kind::Sin:
      j["op"] = "sin";
      j["arg"] = to_json(e->args[0]);
      return j;
    case Kind::Cos:
      j["op"] = "cos";
      j["arg"] = to_json(e->args[0]);
      return j;
    case Kind::Div:
      j["op"] = "div";
      j["num"] = to_json(e->args[0]);
      j["den"] = to_json(e->args[1]);
      return j;
    case Kind::Bump:
      j["op"] = "bump";
      j["vars"] = e->bump_vars;
      j["center"] = e->bump_center;
      j["radius"] = e->bump_radius;
      return j;
  }
  throw EvaluationError("expr::to_json: unreachable");
}

namespace {

// flatten nested sums with sign tracking: neg(add(a, b)) -> {-a, -b}
void signed_sum_terms(const ExprPtr& e, bool negated,
                      std::vector<std::pair<bool, ExprPtr>>& out) {
  if (e->kind == Kind::Neg) {
    signed_sum_terms(e->args[0], !negated, out);
    return;
  }
  if (e->kind == Kind::Add) {
    for (auto& a : e->args) signed_sum_terms(a, negated, out);
    return;
  }
  out.emplace_back(negated, e);
}

}  // namespace

std::optional<std::vector<ExprPtr>> pair_factorize(const ExprPtr& e, int k) {
  require(k >= 1, "pair_factorize: bad k");
  // which pair does a variable belong to? var v in {p, k+p} -> pair p
  auto pair_of_var = [&](int v) { return v % k; };

  // pair of a subexpression, or -1 for constants; nullopt when pairs mix
  auto pair_of_expr = [&](const ExprPtr& f) -> std::optional<int> {
    if (max_var_index(f) >= 2 * k) return std::nullopt;
    std::vector<bool> used(size_t(2 * k), false);
    collect_vars(f, used);
    int pair = -1;
    for (int v = 0; v < 2 * k; ++v) {
      if (!used[size_t(v)]) continue;
      int p = pair_of_var(v);
      if (pair == -1)
        pair = p;
      else if (pair != p)
        return std::nullopt;
    }
    return pair;
  };

  std::vector<ExprPtr> flat_raw;
  if (e->kind == Kind::Mul)
    flat_raw = e->args;
  else
    flat_raw = {e};

  // exp(a + b) with a, b supported on different pairs splits as exp(a)·exp(b)
  std::vector<ExprPtr> flat;
  for (auto& f : flat_raw) {
    if (f->kind != Kind::Exp) {
      flat.push_back(f);
      continue;
    }
    std::vector<std::pair<bool, ExprPtr>> terms;
    signed_sum_terms(f->args[0], false, terms);
    std::vector<std::vector<ExprPtr>> groups(size_t(k) + 1);  // slot k: constants
    bool splittable = true;
    for (auto& [negated, t] : terms) {
      auto p = pair_of_expr(t);
      if (!p) {
        splittable = false;
        break;
      }
      groups[*p < 0 ? size_t(k) : size_t(*p)].push_back(negated ? neg(t) : t);
    }
    if (!splittable) {
      flat.push_back(f);
      continue;
    }
    for (auto& g : groups)
      if (!g.empty()) flat.push_back(exp(g.size() == 1 ? g[0] : add(g)));
  }

  std::vector<std::vector<ExprPtr>> per_pair(k);
  for (auto& f : flat) {
    auto pair = pair_of_expr(f);
    if (!pair) return std::nullopt;  // factor spans pairs
    per_pair[*pair < 0 ? 0 : *pair].push_back(f);  // constants join pair 0
  }

  std::vector<ExprPtr> out;
  for (int p = 0; p < k; ++p) {
    // remap {p, k+p} -> {0, 1}
    std::vector<int> map(2 * k, -1);
    map[p] = 0;
    map[k + p] = 1;
    if (per_pair[p].empty()) {
      out.push_back(constant(1.0));
    } else {
      out.push_back(remap_vars(mul(per_pair[p]), map));
    }
  }
  return out;
}

std::vector<ExprPtr> sum_terms(const ExprPtr& e) {
  if (e->kind == Kind::Add) return e->args;
  return {e};
}

}  // namespace warpfield::expr
