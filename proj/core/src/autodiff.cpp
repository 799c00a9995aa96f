#include "trisdf/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace trisdf::ad {

// ---------------------------------------------------------------------------
// ParamStore / GradBuffer

int ParamStore::add(std::string name, std::vector<int> shape, std::vector<real> init) {
  if (index_.count(name)) throw ContractError("duplicate parameter name: " + name);
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ContractError("parameter dimension must be positive");
    n *= static_cast<std::size_t>(d);
  }
  if (init.empty()) init.assign(n, real(0));
  if (init.size() != n) throw ContractError("init size mismatch for parameter " + name);
  Entry e;
  e.name = name;
  e.shape = std::move(shape);
  e.value = std::move(init);
  e.grad.assign(n, real(0));
  int id = static_cast<int>(entries_.size());
  index_.emplace(std::move(name), id);
  entries_.push_back(std::move(e));
  return id;
}

int ParamStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? -1 : it->second;
}

int ParamStore::require(std::string_view name) const {
  int id = find(name);
  if (id < 0) throw ContractError("unknown parameter: " + std::string(name));
  return id;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) std::fill(e.grad.begin(), e.grad.end(), real(0));
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

GradBuffer::GradBuffer(const ParamStore& store) {
  slots_.resize(store.count());
  for (int i = 0; i < store.count(); ++i) slots_[i].assign(store.value(i).size(), real(0));
}

void GradBuffer::zero() {
  for (auto& s : slots_) std::fill(s.begin(), s.end(), real(0));
}

void GradBuffer::flush_into(ParamStore& store) {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    auto g = store.grad(static_cast<int>(i));
    auto& s = slots_[i];
    for (std::size_t k = 0; k < s.size(); ++k) {
      g[k] += s[k];
      s[k] = real(0);
    }
  }
}

// ---------------------------------------------------------------------------
// Scalar kernels

real softplus(real x) {
  return std::max(x, real(0)) + std::log1p(std::exp(-std::abs(x)));
}

real sigmoid(real x) {
  if (x >= 0) return real(1) / (real(1) + std::exp(-x));
  real e = std::exp(x);
  return e / (real(1) + e);
}

real softplus_inverse(real y) {
  // y = log(1 + e^x)  =>  x = log(e^y - 1) = y + log(1 - e^-y)
  return y + std::log(-std::expm1(-y));
}

real laplace_sigma(real s, real beta) {
  if (s <= 0) return std::exp(s / beta) / (2 * beta);
  return (real(1) - std::exp(-s / beta) / 2) / beta;
}

real laplace_dsigma_ds(real s, real beta) {
  // both branches meet at 1/(2 beta^2)
  return std::exp(-std::abs(s) / beta) / (2 * beta * beta);
}

real laplace_dsigma_dbeta(real s, real beta) {
  if (s <= 0) {
    real sig = laplace_sigma(s, beta);
    return -(sig / beta) * (1 + s / beta);
  }
  real e = std::exp(-s / beta);
  return (-1 + e / 2 - s * e / (2 * beta)) / (beta * beta);
}

// ---------------------------------------------------------------------------
// Tape

Tape::Tape(const ParamStore& params) : params_(&params) {}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  adjoints_.clear();
  aux_i_.clear();
  aux_d_.clear();
}

Var Tape::push(Op op, int len, int a, int b) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.val = static_cast<int>(values_.size());
  n.len = len;
  values_.resize(values_.size() + static_cast<std::size_t>(len), real(0));
  nodes_.push_back(n);
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::check_valid(Var v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
    throw ContractError("tape variable does not belong to this tape");
}

void Tape::check_same_len(Var a, Var b, const char* what) const {
  check_valid(a);
  check_valid(b);
  if (nodes_[a.id].len != nodes_[b.id].len)
    throw ContractError(std::string(what) + ": operand length mismatch");
}

Var Tape::constant(real x) {
  Var v = push(Op::Const, 1);
  data(v.id)[0] = x;
  return v;
}

Var Tape::constant(std::span<const real> values) {
  Var v = push(Op::Const, static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), data(v.id));
  return v;
}

Var Tape::param(int param_id) {
  auto vals = params_->value(param_id);
  Var v = push(Op::Param, static_cast<int>(vals.size()));
  nodes_[v.id].param = param_id;
  std::copy(vals.begin(), vals.end(), data(v.id));
  return v;
}

Var Tape::add(Var a, Var b) {
  check_same_len(a, b, "add");
  Var v = push(Op::Add, nodes_[a.id].len, a.id, b.id);
  const real* pa = data(a.id);
  const real* pb = data(b.id);
  real* out = data(v.id);
  for (int i = 0; i < nodes_[v.id].len; ++i) out[i] = pa[i] + pb[i];
  return v;
}

Var Tape::sub(Var a, Var b) {
  check_same_len(a, b, "sub");
  Var v = push(Op::Sub, nodes_[a.id].len, a.id, b.id);
  const real* pa = data(a.id);
  const real* pb = data(b.id);
  real* out = data(v.id);
  for (int i = 0; i < nodes_[v.id].len; ++i) out[i] = pa[i] - pb[i];
  return v;
}

Var Tape::mul(Var a, Var b) {
  check_same_len(a, b, "mul");
  Var v = push(Op::Mul, nodes_[a.id].len, a.id, b.id);
  const real* pa = data(a.id);
  const real* pb = data(b.id);
  real* out = data(v.id);
  for (int i = 0; i < nodes_[v.id].len; ++i) out[i] = pa[i] * pb[i];
  return v;
}

Var Tape::scale(Var scalar, Var vec) {
  check_valid(scalar);
  check_valid(vec);
  if (nodes_[scalar.id].len != 1) throw ContractError("scale: first operand must be scalar");
  Var v = push(Op::Scale, nodes_[vec.id].len, scalar.id, vec.id);
  real s = data(scalar.id)[0];
  const real* pv = data(vec.id);
  real* out = data(v.id);
  for (int i = 0; i < nodes_[v.id].len; ++i) out[i] = s * pv[i];
  return v;
}

Var Tape::add_const(Var a, real c) {
  check_valid(a);
  Var v = push(Op::AddC, nodes_[a.id].len, a.id);
  nodes_[v.id].c = c;
  const real* pa = data(a.id);
  real* out = data(v.id);
  for (int i = 0; i < nodes_[v.id].len; ++i) out[i] = pa[i] + c;
  return v;
}

Var Tape::mul_const(Var a, real c) {
  check_valid(a);
  Var v = push(Op::MulC, nodes_[a.id].len, a.id);
  nodes_[v.id].c = c;
  const real* pa = data(a.id);
  real* out = data(v.id);
  for (int i = 0; i < nodes_[v.id].len; ++i) out[i] = pa[i] * c;
  return v;
}

#define TRISDF_UNARY(NAME, OP, EXPR)                        \
  Var Tape::NAME(Var a) {                                   \
    check_valid(a);                                         \
    Var v = push(Op::OP, nodes_[a.id].len, a.id);           \
    const real* pa = data(a.id);                            \
    real* out = data(v.id);                                 \
    for (int i = 0; i < nodes_[v.id].len; ++i) {            \
      real x = pa[i];                                       \
      out[i] = (EXPR);                                      \
    }                                                       \
    return v;                                               \
  }

TRISDF_UNARY(exp, Exp, std::exp(x))
TRISDF_UNARY(expm1, Expm1, std::expm1(x))
TRISDF_UNARY(log, Log, std::log(x))
TRISDF_UNARY(sqrt, Sqrt, std::sqrt(x))
TRISDF_UNARY(sin, Sin, std::sin(x))
TRISDF_UNARY(cos, Cos, std::cos(x))
TRISDF_UNARY(abs, Abs, std::abs(x))
TRISDF_UNARY(softplus, Softplus, ad::softplus(x))
TRISDF_UNARY(sigmoid, Sigmoid, ad::sigmoid(x))

#undef TRISDF_UNARY

Var Tape::dot(Var a, Var b) {
  check_same_len(a, b, "dot");
  Var v = push(Op::Dot, 1, a.id, b.id);
  const real* pa = data(a.id);
  const real* pb = data(b.id);
  real acc = 0;
  for (int i = 0; i < nodes_[a.id].len; ++i) acc += pa[i] * pb[i];
  data(v.id)[0] = acc;
  return v;
}

Var Tape::sum(Var a) {
  check_valid(a);
  Var v = push(Op::Sum, 1, a.id);
  const real* pa = data(a.id);
  real acc = 0;
  for (int i = 0; i < nodes_[a.id].len; ++i) acc += pa[i];
  data(v.id)[0] = acc;
  return v;
}

Var Tape::select(Var a, int index) {
  check_valid(a);
  if (index < 0 || index >= nodes_[a.id].len) throw ContractError("select: index out of range");
  Var v = push(Op::Select, 1, a.id);
  nodes_[v.id].c = real(index);
  data(v.id)[0] = data(a.id)[index];
  return v;
}

Var Tape::concat(std::span<const Var> parts) {
  int total = 0;
  for (Var p : parts) {
    check_valid(p);
    total += nodes_[p.id].len;
  }
  Var v = push(Op::Concat, total);
  nodes_[v.id].aux = static_cast<int>(aux_i_.size());
  aux_i_.push_back(static_cast<int>(parts.size()));
  for (Var p : parts) aux_i_.push_back(p.id);
  real* out = data(v.id);
  for (Var p : parts) {
    const real* pp = data(p.id);
    out = std::copy(pp, pp + nodes_[p.id].len, out);
  }
  return v;
}

Var Tape::affine(int weight_param, int bias_param, Var x) {
  check_valid(x);
  const auto& wshape = params_->shape(weight_param);
  if (wshape.size() != 2) throw ContractError("affine: weight must be 2-D");
  int rows = wshape[0];
  int cols = wshape[1];
  if (cols != nodes_[x.id].len) throw ContractError("affine: input length mismatch");
  auto bias = params_->value(bias_param);
  if (static_cast<int>(bias.size()) != rows) throw ContractError("affine: bias length mismatch");

  Var v = push(Op::Affine, rows, x.id);
  nodes_[v.id].param = weight_param;
  nodes_[v.id].param2 = bias_param;
  const real* w = params_->value(weight_param).data();
  const real* px = data(x.id);
  real* out = data(v.id);
  for (int r = 0; r < rows; ++r) {
    const real* wr = w + static_cast<std::size_t>(r) * cols;
    real acc = bias[r];
    for (int c = 0; c < cols; ++c) acc += wr[c] * px[c];
    out[r] = acc;
  }
  return v;
}

Var Tape::gather_bilinear(int plane_param, Var u, Var v) {
  check_valid(u);
  check_valid(v);
  if (nodes_[u.id].len != 1 || nodes_[v.id].len != 1)
    throw ContractError("gather_bilinear: coordinates must be scalar");
  const auto& shape = params_->shape(plane_param);
  if (shape.size() != 3 || shape[0] != shape[1])
    throw ContractError("gather_bilinear: plane must be [R, R, C]");
  const int res = shape[0];
  const int channels = shape[2];
  const real uu = data(u.id)[0];
  const real vv = data(v.id)[0];
  const real slack = real(1e-9);
  if (!(uu >= -slack && uu <= res - 1 + slack && vv >= -slack && vv <= res - 1 + slack))
    throw ContractError("gather_bilinear: sample outside plane extent");

  int i0 = std::clamp(static_cast<int>(std::floor(uu)), 0, res - 2);
  int j0 = std::clamp(static_cast<int>(std::floor(vv)), 0, res - 2);
  real fu = uu - i0;
  real fv = vv - j0;

  Var out = push(Op::GatherBilinear, channels, u.id, v.id);
  nodes_[out.id].param = plane_param;
  nodes_[out.id].aux = static_cast<int>(aux_i_.size());
  aux_i_.push_back(i0);
  aux_i_.push_back(j0);
  int aux_d = static_cast<int>(aux_d_.size());
  aux_d_.push_back(fu);
  aux_d_.push_back(fv);
  nodes_[out.id].c = real(aux_d);

  const real* plane = params_->value(plane_param).data();
  const real* p00 = plane + (static_cast<std::size_t>(i0) * res + j0) * channels;
  const real* p01 = p00 + channels;
  const real* p10 = p00 + static_cast<std::size_t>(res) * channels;
  const real* p11 = p10 + channels;
  const real w00 = (1 - fu) * (1 - fv);
  const real w01 = (1 - fu) * fv;
  const real w10 = fu * (1 - fv);
  const real w11 = fu * fv;
  real* po = data(out.id);
  for (int c = 0; c < channels; ++c)
    po[c] = w00 * p00[c] + w01 * p01[c] + w10 * p10[c] + w11 * p11[c];
  return out;
}

Var Tape::frequency_encode(Var x, int levels) {
  check_valid(x);
  if (nodes_[x.id].len != 1) throw ContractError("frequency_encode: input must be scalar");
  if (levels < 0) throw ContractError("frequency_encode: levels must be >= 0");
  Var v = push(Op::FreqEncode, 1 + 2 * levels, x.id);
  nodes_[v.id].c = real(levels);
  const real xv = data(x.id)[0];
  real* out = data(v.id);
  out[0] = xv;
  real freq = real(M_PI);
  for (int k = 0; k < levels; ++k, freq *= 2) {
    out[1 + 2 * k] = std::sin(freq * xv);
    out[2 + 2 * k] = std::cos(freq * xv);
  }
  return v;
}

Var Tape::laplace_density(Var s, Var beta) {
  check_valid(s);
  check_valid(beta);
  if (nodes_[s.id].len != 1 || nodes_[beta.id].len != 1)
    throw ContractError("laplace_density: scalar operands expected");
  real b = data(beta.id)[0];
  if (!(b > 0)) throw ContractError("laplace_density: beta must be positive");
  Var v = push(Op::LaplaceDensity, 1, s.id, beta.id);
  data(v.id)[0] = laplace_sigma(data(s.id)[0], b);
  return v;
}

std::span<const real> Tape::value(Var v) const {
  check_valid(v);
  return {data(v.id), static_cast<std::size_t>(nodes_[v.id].len)};
}

real Tape::scalar(Var v) const {
  check_valid(v);
  if (nodes_[v.id].len != 1) throw ContractError("scalar() on a non-scalar node");
  return data(v.id)[0];
}

void Tape::backward(Var output, GradBuffer& sink, real seed_adjoint) {
  check_valid(output);
  if (nodes_[output.id].len != 1)
    throw ContractError("backward: output node must be scalar");

  adjoints_.assign(values_.size(), real(0));
  adj(output.id)[0] = seed_adjoint;

  for (int id = output.id; id >= 0; --id) {
    const Node& n = nodes_[id];
    const real* a = adj(id);
    switch (n.op) {
      case Op::Const:
        break;
      case Op::Param: {
        auto g = sink[n.param];
        for (int i = 0; i < n.len; ++i) g[i] += a[i];
        break;
      }
      case Op::Add: {
        real* pa = adj(n.a);
        real* pb = adj(n.b);
        for (int i = 0; i < n.len; ++i) {
          pa[i] += a[i];
          pb[i] += a[i];
        }
        break;
      }
      case Op::Sub: {
        real* pa = adj(n.a);
        real* pb = adj(n.b);
        for (int i = 0; i < n.len; ++i) {
          pa[i] += a[i];
          pb[i] -= a[i];
        }
        break;
      }
      case Op::Mul: {
        real* pa = adj(n.a);
        real* pb = adj(n.b);
        const real* va = data(n.a);
        const real* vb = data(n.b);
        for (int i = 0; i < n.len; ++i) {
          pa[i] += a[i] * vb[i];
          pb[i] += a[i] * va[i];
        }
        break;
      }
      case Op::Scale: {
        real* ps = adj(n.a);
        real* pv = adj(n.b);
        const real s = data(n.a)[0];
        const real* vv = data(n.b);
        real acc = 0;
        for (int i = 0; i < n.len; ++i) {
          acc += a[i] * vv[i];
          pv[i] += a[i] * s;
        }
        ps[0] += acc;
        break;
      }
      case Op::AddC: {
        real* pa = adj(n.a);
        for (int i = 0; i < n.len; ++i) pa[i] += a[i];
        break;
      }
      case Op::MulC: {
        real* pa = adj(n.a);
        for (int i = 0; i < n.len; ++i) pa[i] += a[i] * n.c;
        break;
      }
      case Op::Exp: {
        real* pa = adj(n.a);
        const real* out = data(id);
        for (int i = 0; i < n.len; ++i) pa[i] += a[i] * out[i];
        break;
      }
      case Op::Expm1: {
        real* pa = adj(n.a);
        const real* out = data(id);
        for (int i = 0; i < n.len; ++i) pa[i] += a[i] * (out[i] + 1);
        break;
      }
      case Op::Log: {
        real* pa = adj(n.a);
        const real* va = data(n.a);
        for (int i = 0; i < n.len; ++i) pa[i] += a[i] / va[i];
        break;
      }
      case Op::Sqrt: {
        real* pa = adj(n.a);
        const real* out = data(id);
        for (int i = 0; i < n.len; ++i) pa[i] += a[i] / (2 * out[i]);
        break;
      }
      case Op::Sin: {
        real* pa = adj(n.a);
        const real* va = data(n.a);
        for (int i = 0; i < n.len; ++i) pa[i] += a[i] * std::cos(va[i]);
        break;
      }
      case Op::Cos: {
        real* pa = adj(n.a);
        const real* va = data(n.a);
        for (int i = 0; i < n.len; ++i) pa[i] -= a[i] * std::sin(va[i]);
        break;
      }
      case Op::Abs: {
        real* pa = adj(n.a);
        const real* va = data(n.a);
        for (int i = 0; i < n.len; ++i) {
          if (va[i] > 0)
            pa[i] += a[i];
          else if (va[i] < 0)
            pa[i] -= a[i];
          // subgradient 0 at exactly 0
        }
        break;
      }
      case Op::Softplus: {
        real* pa = adj(n.a);
        const real* va = data(n.a);
        for (int i = 0; i < n.len; ++i) pa[i] += a[i] * ad::sigmoid(va[i]);
        break;
      }
      case Op::Sigmoid: {
        real* pa = adj(n.a);
        const real* out = data(id);
        for (int i = 0; i < n.len; ++i) pa[i] += a[i] * out[i] * (1 - out[i]);
        break;
      }
      case Op::Dot: {
        real* pa = adj(n.a);
        real* pb = adj(n.b);
        const real* va = data(n.a);
        const real* vb = data(n.b);
        const real g = a[0];
        const int len = nodes_[n.a].len;
        for (int i = 0; i < len; ++i) {
          pa[i] += g * vb[i];
          pb[i] += g * va[i];
        }
        break;
      }
      case Op::Sum: {
        real* pa = adj(n.a);
        const real g = a[0];
        const int len = nodes_[n.a].len;
        for (int i = 0; i < len; ++i) pa[i] += g;
        break;
      }
      case Op::Select: {
        adj(n.a)[static_cast<int>(n.c)] += a[0];
        break;
      }
      case Op::Concat: {
        const int* parts = aux_i_.data() + n.aux;
        const int count = parts[0];
        int ofs = 0;
        for (int p = 0; p < count; ++p) {
          int pid = parts[1 + p];
          real* pa = adj(pid);
          const int len = nodes_[pid].len;
          for (int i = 0; i < len; ++i) pa[i] += a[ofs + i];
          ofs += len;
        }
        break;
      }
      case Op::Affine: {
        const auto& wshape = params_->shape(n.param);
        const int rows = wshape[0];
        const int cols = wshape[1];
        const real* w = params_->value(n.param).data();
        const real* vx = data(n.a);
        real* px = adj(n.a);
        real* gw = sink[n.param].data();
        real* gb = sink[n.param2].data();
        for (int r = 0; r < rows; ++r) {
          const real g = a[r];
          if (g == 0) continue;
          const real* wr = w + static_cast<std::size_t>(r) * cols;
          real* gwr = gw + static_cast<std::size_t>(r) * cols;
          for (int c = 0; c < cols; ++c) {
            px[c] += g * wr[c];
            gwr[c] += g * vx[c];
          }
          gb[r] += g;
        }
        break;
      }
      case Op::GatherBilinear: {
        const auto& shape = params_->shape(n.param);
        const int res = shape[0];
        const int channels = shape[2];
        const int i0 = aux_i_[n.aux];
        const int j0 = aux_i_[n.aux + 1];
        const int aux_d = static_cast<int>(n.c);
        const real fu = aux_d_[aux_d];
        const real fv = aux_d_[aux_d + 1];
        const real w00 = (1 - fu) * (1 - fv);
        const real w01 = (1 - fu) * fv;
        const real w10 = fu * (1 - fv);
        const real w11 = fu * fv;
        const std::size_t base00 = (static_cast<std::size_t>(i0) * res + j0) * channels;
        const std::size_t base01 = base00 + channels;
        const std::size_t base10 = base00 + static_cast<std::size_t>(res) * channels;
        const std::size_t base11 = base10 + channels;
        real* gplane = sink[n.param].data();
        const real* plane = params_->value(n.param).data();
        real du = 0, dv = 0;
        for (int c = 0; c < channels; ++c) {
          const real g = a[c];
          gplane[base00 + c] += g * w00;
          gplane[base01 + c] += g * w01;
          gplane[base10 + c] += g * w10;
          gplane[base11 + c] += g * w11;
          const real p00 = plane[base00 + c];
          const real p01 = plane[base01 + c];
          const real p10 = plane[base10 + c];
          const real p11 = plane[base11 + c];
          du += g * (-(1 - fv) * p00 - fv * p01 + (1 - fv) * p10 + fv * p11);
          dv += g * (-(1 - fu) * p00 + (1 - fu) * p01 - fu * p10 + fu * p11);
        }
        adj(n.a)[0] += du;
        adj(n.b)[0] += dv;
        break;
      }
      case Op::FreqEncode: {
        const int levels = static_cast<int>(n.c);
        const real* out = data(id);
        real dx = a[0];
        real freq = real(M_PI);
        for (int k = 0; k < levels; ++k, freq *= 2) {
          // d(sin f x) = f cos, d(cos f x) = -f sin; reuse forward values
          dx += freq * (a[1 + 2 * k] * out[2 + 2 * k] - a[2 + 2 * k] * out[1 + 2 * k]);
        }
        adj(n.a)[0] += dx;
        break;
      }
      case Op::LaplaceDensity: {
        const real s = data(n.a)[0];
        const real b = data(n.b)[0];
        adj(n.a)[0] += a[0] * laplace_dsigma_ds(s, b);
        adj(n.b)[0] += a[0] * laplace_dsigma_dbeta(s, b);
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Gradient checking

real grad_check(const GraphBuilder& build, ParamStore& params, real eps) {
  Tape tape(params);
  Var out = build(tape);
  real f0 = tape.scalar(out);
  if (!std::isfinite(f0)) throw RuntimeError("grad_check: function value is not finite");
  GradBuffer analytic(params);
  tape.backward(out, analytic);

  auto evaluate = [&]() {
    Tape t(params);
    real f = t.scalar(build(t));
    if (!std::isfinite(f)) throw RuntimeError("grad_check: perturbed value is not finite");
    return f;
  };

  real worst = 0;
  for (int p = 0; p < params.count(); ++p) {
    auto vals = params.value(p);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const real saved = vals[i];
      vals[i] = saved + eps;
      real fp = evaluate();
      vals[i] = saved - eps;
      real fm = evaluate();
      vals[i] = saved;
      real fd = (fp - fm) / (2 * eps);
      real err = std::abs(analytic[p][i] - fd) / std::max(real(1), std::abs(fd));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Adam

AdamOptimizer::AdamOptimizer(const ParamStore& store, AdamConfig cfg) : cfg_(cfg) {
  lr_.assign(store.count(), real(0));
  m_.resize(store.count());
  v_.resize(store.count());
  t_.assign(store.count(), 0);
  for (int i = 0; i < store.count(); ++i) {
    m_[i].assign(store.value(i).size(), real(0));
    v_[i].assign(store.value(i).size(), real(0));
  }
}

void AdamOptimizer::set_learning_rate(int param_id, real lr) { lr_[param_id] = lr; }

void AdamOptimizer::step(ParamStore& store) {
  for (int p = 0; p < store.count(); ++p) {
    if (lr_[p] == 0) continue;
    ++t_[p];
    const real bc1 = 1 - std::pow(cfg_.beta1, real(t_[p]));
    const real bc2 = 1 - std::pow(cfg_.beta2, real(t_[p]));
    auto val = store.value(p);
    auto g = store.grad(p);
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < val.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1 - cfg_.beta2) * g[i] * g[i];
      const real mh = m[i] / bc1;
      const real vh = v[i] / bc2;
      val[i] -= lr_[p] * mh / (std::sqrt(vh) + cfg_.eps);
    }
  }
}

}  // namespace trisdf::ad
