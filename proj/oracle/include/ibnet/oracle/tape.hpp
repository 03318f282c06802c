#pragma once

#include <cstdint>
#include <vector>

namespace ibnet::oracle {

class Tape;

// Scalar handle recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;
  double value = 0.0;
};

// Minimal scalar reverse-mode tape. Every node has at most two parents.
class Tape {
 public:
  Var variable(double v);
  Var constant(double v) { return variable(v); }
  Var record(double v, std::uint32_t a, double da, std::uint32_t b = kNone, double db = 0.0);

  // Adjoints of every node with respect to `out`.
  std::vector<double> gradient(const Var& out) const;
  std::size_t size() const { return nodes_.size(); }

  static constexpr std::uint32_t kNone = 0xffffffffu;

 private:
  struct Node {
    std::uint32_t a, b;
    double da, db;
  };
  std::vector<Node> nodes_;
};

Var operator+(const Var& x, const Var& y);
Var operator-(const Var& x, const Var& y);
Var operator*(const Var& x, const Var& y);
Var operator+(const Var& x, double c);
Var operator*(const Var& x, double c);
Var operator-(const Var& x);

Var exp(const Var& x);
Var tanh(const Var& x);
Var sqrt(const Var& x);
Var max(const Var& x, const Var& y);

inline double value_of(double x) { return x; }
inline double value_of(long double x) { return static_cast<double>(x); }
inline double value_of(const Var& x) { return x.value; }

}  // namespace ibnet::oracle
