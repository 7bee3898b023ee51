#pragma once

// Small arithmetic expression language in x and y, used for custom initial
// data in scenario files:
//   numbers, x, y, pi, e, + - * / ^, parentheses and the functions
//   sin cos tan exp log sqrt abs tanh sinh cosh atan min max pow.

#include "pnp/core.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pnp {

class Expression {
 public:
  static Expression parse(const std::string& text) {
    Parser p{text, 0};
    Expression e;
    e.root_ = p.expression();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    e.text_ = text;
    return e;
  }

  double operator()(Point pt) const { return root_->eval(pt.x, pt.y); }
  const std::string& text() const { return text_; }

 private:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(double x, double y) const = 0;
  };
  using Ptr = std::shared_ptr<const Node>;

  struct Const : Node {
    double v;
    explicit Const(double v) : v(v) {}
    double eval(double, double) const override { return v; }
  };
  struct Var : Node {
    bool is_x;
    explicit Var(bool is_x) : is_x(is_x) {}
    double eval(double x, double y) const override { return is_x ? x : y; }
  };
  struct Unary : Node {
    std::function<double(double)> f;
    Ptr a;
    Unary(std::function<double(double)> f, Ptr a) : f(std::move(f)), a(std::move(a)) {}
    double eval(double x, double y) const override { return f(a->eval(x, y)); }
  };
  struct Binary : Node {
    std::function<double(double, double)> f;
    Ptr a, b;
    Binary(std::function<double(double, double)> f, Ptr a, Ptr b)
        : f(std::move(f)), a(std::move(a)), b(std::move(b)) {}
    double eval(double x, double y) const override { return f(a->eval(x, y), b->eval(x, y)); }
  };

  struct Parser {
    const std::string& s;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ConfigError("expression '" + s + "' at column " + std::to_string(pos + 1) + ": " + msg);
    }
    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Ptr expression() {
      Ptr lhs = term();
      for (;;) {
        if (accept('+')) lhs = std::make_shared<Binary>(std::plus<>(), lhs, term());
        else if (accept('-')) lhs = std::make_shared<Binary>(std::minus<>(), lhs, term());
        else return lhs;
      }
    }
    Ptr term() {
      Ptr lhs = unary();
      for (;;) {
        if (accept('*')) lhs = std::make_shared<Binary>(std::multiplies<>(), lhs, unary());
        else if (accept('/')) lhs = std::make_shared<Binary>(std::divides<>(), lhs, unary());
        else return lhs;
      }
    }
    Ptr unary() {
      if (accept('-')) return std::make_shared<Unary>(std::negate<>(), unary());
      if (accept('+')) return unary();
      return power();
    }
    Ptr power() {
      Ptr base = primary();
      if (accept('^'))
        return std::make_shared<Binary>([](double a, double b) { return std::pow(a, b); }, base, unary());
      return base;
    }
    Ptr primary() {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end of expression");
      if (accept('(')) {
        Ptr e = expression();
        expect(')');
        return e;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const char* begin = s.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("bad number");
        pos += static_cast<std::size_t>(end - begin);
        return std::make_shared<Const>(v);
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name = s.substr(start, pos - start);
        if (name == "x") return std::make_shared<Var>(true);
        if (name == "y") return std::make_shared<Var>(false);
        if (name == "pi") return std::make_shared<Const>(M_PI);
        if (name == "e") return std::make_shared<Const>(M_E);
        return call(name);
      }
      fail(std::string("unexpected '") + c + "'");
    }
    Ptr call(const std::string& name) {
      expect('(');
      std::vector<Ptr> args{expression()};
      while (accept(',')) args.push_back(expression());
      expect(')');
      using F1 = double (*)(double);
      static const std::pair<const char*, F1> unary_fns[] = {
          {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},   {"exp", std::exp},
          {"log", std::log},   {"sqrt", std::sqrt}, {"abs", std::fabs},  {"tanh", std::tanh},
          {"sinh", std::sinh}, {"cosh", std::cosh}, {"atan", std::atan},
      };
      for (const auto& [n, f] : unary_fns) {
        if (name != n) continue;
        if (args.size() != 1) fail(name + " takes one argument");
        return std::make_shared<Unary>(f, args[0]);
      }
      if (name == "min" || name == "max" || name == "pow") {
        if (args.size() != 2) fail(name + " takes two arguments");
        if (name == "min") return std::make_shared<Binary>([](double a, double b) { return std::min(a, b); }, args[0], args[1]);
        if (name == "max") return std::make_shared<Binary>([](double a, double b) { return std::max(a, b); }, args[0], args[1]);
        return std::make_shared<Binary>([](double a, double b) { return std::pow(a, b); }, args[0], args[1]);
      }
      fail("unknown function '" + name + "'");
    }
  };

  Ptr root_;
  std::string text_;
};

}  // namespace pnp
