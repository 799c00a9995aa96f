#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trisdf/common.hpp"

namespace trisdf::ad {

// Named learnable tensors plus their gradient accumulators.
class ParamStore {
 public:
  int add(std::string name, std::vector<int> shape, std::vector<real> init = {});
  int find(std::string_view name) const;        // -1 when absent
  int require(std::string_view name) const;     // throws ContractError

  int count() const { return static_cast<int>(entries_.size()); }
  const std::string& name(int id) const { return entries_[id].name; }
  const std::vector<int>& shape(int id) const { return entries_[id].shape; }
  std::span<real> value(int id) { return entries_[id].value; }
  std::span<const real> value(int id) const { return entries_[id].value; }
  std::span<real> grad(int id) { return entries_[id].grad; }
  std::span<const real> grad(int id) const { return entries_[id].grad; }

  void zero_grad();
  std::size_t total_size() const;

 private:
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::vector<real> value;
    std::vector<real> grad;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// Gradient sink with the same layout as a ParamStore. Parallel workers
// accumulate into private buffers which are then merged in a fixed
// order, keeping results reproducible.
class GradBuffer {
 public:
  GradBuffer() = default;
  explicit GradBuffer(const ParamStore& store);

  std::span<real> operator[](int id) { return slots_[id]; }
  std::span<const real> operator[](int id) const { return slots_[id]; }
  void zero();
  // store.grad += this, then clears this buffer.
  void flush_into(ParamStore& store);

 private:
  std::vector<std::vector<real>> slots_;
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Closed-form pieces of the Laplace-CDF density mapping, shared by the
// tape op and the scalar entry point in field.hpp.
real laplace_sigma(real s, real beta);
real laplace_dsigma_ds(real s, real beta);
real laplace_dsigma_dbeta(real s, real beta);

real softplus(real x);
real sigmoid(real x);
real softplus_inverse(real y);  // softplus(softplus_inverse(y)) == y for y > 0

// Reverse-mode tape over vector-valued nodes. Built eagerly
// (define-by-run), discarded or cleared after each backward pass.
// Nodes reference earlier nodes only, so reverse iteration is a valid
// topological order.
class Tape {
 public:
  explicit Tape(const ParamStore& params);

  void clear();  // keeps arena capacity
  int node_count() const { return static_cast<int>(nodes_.size()); }

  Var constant(real x);
  Var constant(std::span<const real> values);
  Var param(int param_id);  // whole-tensor leaf; meant for small tensors

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);            // elementwise, equal lengths
  Var scale(Var scalar, Var vec);   // scalar times vector
  Var add_const(Var a, real c);
  Var mul_const(Var a, real c);
  Var neg(Var a) { return mul_const(a, real(-1)); }
  Var exp(Var a);
  Var expm1(Var a);
  Var log(Var a);
  Var sqrt(Var a);
  Var sin(Var a);
  Var cos(Var a);
  Var abs(Var a);
  Var softplus(Var a);
  Var sigmoid(Var a);
  Var dot(Var a, Var b);
  Var sum(Var a);
  Var select(Var a, int index);
  Var concat(std::span<const Var> parts);

  // y = W x + b with W: [rows, cols] row-major, b: [rows].
  Var affine(int weight_param, int bias_param, Var x);

  // Bilinear lookup of all channels of a [R, R, C] plane at continuous
  // grid coordinates (u, v) in [0, R-1]. Gradients flow to the plane
  // entries and to u and v.
  Var gather_bilinear(int plane_param, Var u, Var v);

  // [x, sin(pi x), cos(pi x), ..., sin(2^{L-1} pi x), cos(2^{L-1} pi x)]
  Var frequency_encode(Var x, int levels);

  // Laplace-CDF density of a signed distance; beta must be positive.
  Var laplace_density(Var s, Var beta);

  std::span<const real> value(Var v) const;
  real scalar(Var v) const;
  int size(Var v) const { return nodes_[v.id].len; }

  // Accumulates d(output)/d(theta) into `sink` for every parameter
  // reachable from `output`. Output must be scalar.
  void backward(Var output, GradBuffer& sink, real seed_adjoint = 1);

 private:
  enum class Op : std::uint8_t {
    Const, Param, Add, Sub, Mul, Scale, AddC, MulC, Exp, Expm1, Log, Sqrt,
    Sin, Cos, Abs, Softplus, Sigmoid, Dot, Sum, Select, Concat, Affine,
    GatherBilinear, FreqEncode, LaplaceDensity,
  };

  struct Node {
    Op op;
    int a = -1, b = -1;
    int param = -1, param2 = -1;
    int val = 0;
    int len = 0;
    int aux = -1;
    real c = 0;
  };

  Var push(Op op, int len, int a = -1, int b = -1);
  real* data(int node) { return values_.data() + nodes_[node].val; }
  const real* data(int node) const { return values_.data() + nodes_[node].val; }
  real* adj(int node) { return adjoints_.data() + nodes_[node].val; }
  void check_same_len(Var a, Var b, const char* what) const;
  void check_valid(Var v) const;

  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::vector<real> values_;
  std::vector<real> adjoints_;
  std::vector<int> aux_i_;
  std::vector<real> aux_d_;
};

// Builds a scalar graph over the current parameter values.
using GraphBuilder = std::function<Var(Tape&)>;

// Max over parameters of |g_ad - g_fd| / max(1, |g_fd|) with central
// differences of step eps. The finite-difference side only reads
// forward values, so it is independent of the backward pass it checks.
real grad_check(const GraphBuilder& build, ParamStore& params, real eps);

struct AdamConfig {
  real beta1 = 0.9;
  real beta2 = 0.999;
  real eps = 1e-8;
};

// Adam with per-parameter learning rates. Parameters with rate 0 are
// skipped entirely (their moments do not advance).
class AdamOptimizer {
 public:
  AdamOptimizer(const ParamStore& store, AdamConfig cfg = {});

  void set_learning_rate(int param_id, real lr);
  real learning_rate(int param_id) const { return lr_[param_id]; }
  void step(ParamStore& store);

 private:
  AdamConfig cfg_;
  std::vector<real> lr_;
  std::vector<std::vector<real>> m_;
  std::vector<std::vector<real>> v_;
  std::vector<long> t_;
};

}  // namespace trisdf::ad
