#include "skyaug/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "skyaug/error.hpp"

namespace skyaug::ag {

Tensor& Node::grad_buffer() {
  if (grad.shape() != value.shape())
    grad = Tensor(value.shape(), 0.0);
  return grad;
}

Var Var::leaf(Tensor value, bool requires_grad, std::string label) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->label = std::move(label);
  return Var(std::move(n));
}

const Tensor& Var::grad() const { return node_->grad_buffer(); }

void Var::zero_grad() { node_->grad_buffer().fill(0.0); }

namespace {

using NodePtr = std::shared_ptr<Node>;

Var make_node(Tensor value, std::vector<NodePtr> inputs, std::string label,
              std::function<void(Node&)> fn) {
  if (!value.all_finite())
    throw DataError("non-finite value produced by '" + label + "'");
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->label = std::move(label);
  n->requires_grad = std::ranges::any_of(inputs, [](const auto& in) { return in->requires_grad; });
  if (n->requires_grad) {
    n->inputs = std::move(inputs);
    n->backward_fn = std::move(fn);
  }
  return Var(std::move(n));
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape())
    throw UsageError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
}

// Applies f(grad_out, value_out, grad_in, value_in) elementwise for a unary op.
template <typename F>
Var unary(const Var& a, std::string label, auto forward, F backward_elem) {
  Tensor out(a.shape());
  const auto& in = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = forward(in[i]);
  return make_node(std::move(out), {a.ptr()}, std::move(label), [backward_elem](Node& self) {
    Node& x = *self.inputs[0];
    if (!x.requires_grad)
      return;
    Tensor& gx = x.grad_buffer();
    for (std::size_t i = 0; i < gx.numel(); ++i)
      gx[i] += self.grad[i] * backward_elem(x.value[i], self.value[i]);
  });
}

} // namespace

void backward(const Var& loss) {
  if (loss.value().numel() != 1)
    throw UsageError("backward: loss must be a scalar, got shape " + shape_string(loss.shape()));
  if (!loss.requires_grad())
    return;

  // Iterative post-order DFS; reversed it is a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{&loss.node(), 0}};
  seen.insert(&loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second)
        stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Intermediate gradients start from zero on every call; leaves accumulate.
  for (Node* n : order)
    if (n->backward_fn)
      n->grad_buffer().fill(0.0);
  loss.node().grad_buffer()[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node& n = **it;
    if (!n.backward_fn)
      continue;
    n.backward_fn(n);
    for (const auto& in : n.inputs)
      if (in->requires_grad && !in->grad_buffer().all_finite())
        throw DataError("non-finite gradient flowing out of '" + n.label + "' into '" +
                        in->label + "'");
  }
}

Var detach(const Var& a) { return Var::constant(a.value(), a.label() + ".detached"); }

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = a.value()[i] + b.value()[i];
  return make_node(std::move(out), {a.ptr(), b.ptr()}, "add", [](Node& self) {
    for (const auto& in : self.inputs) {
      if (!in->requires_grad)
        continue;
      Tensor& g = in->grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i)
        g[i] += self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = a.value()[i] * b.value()[i];
  return make_node(std::move(out), {a.ptr(), b.ptr()}, "mul", [](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    if (x.requires_grad) {
      Tensor& g = x.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i)
        g[i] += self.grad[i] * y.value[i];
    }
    if (y.requires_grad) {
      Tensor& g = y.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i)
        g[i] += self.grad[i] * x.value[i];
    }
  });
}

Var scale(const Var& a, double c) {
  return unary(
      a, "scale", [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var square(const Var& a) {
  return unary(
      a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values())
    s += v;
  return make_node(Tensor({1}, s), {a.ptr()}, "sum", [](Node& self) {
    Tensor& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i)
      g[i] += self.grad[0];
  });
}

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().numel())); }

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return make_node(std::move(out), {a.ptr()}, "reshape", [](Node& self) {
    Tensor& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i)
      g[i] += self.grad[i];
  });
}

Var relu(const Var& a, const std::string& label) {
  return unary(
      a, label, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(const Var& a, double slope, const std::string& label) {
  return unary(
      a, label, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var tanh(const Var& a, const std::string& label) {
  return unary(
      a, label, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

} // namespace

Var sigmoid(const Var& a, const std::string& label) {
  return unary(
      a, label, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var linear(const Var& x, const Var& w, const Var& b, const std::string& label) {
  if (x.value().rank() != 2 || w.value().rank() != 2 || b.value().rank() != 1)
    throw UsageError(label + ": linear expects x [N,in], w [in,out], b [out]");
  const std::size_t n = x.value().dim(0), in = x.value().dim(1), out = w.value().dim(1);
  if (w.value().dim(0) != in || b.value().dim(0) != out)
    throw UsageError(label + ": shape mismatch x " + shape_string(x.shape()) + ", w " +
                     shape_string(w.shape()) + ", b " + shape_string(b.shape()));

  Tensor y({n, out});
  auto ym = y.matrix(n, out);
  ym.noalias() = x.value().matrix(n, in) * w.value().matrix(in, out);
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.value().data(), static_cast<Eigen::Index>(out));

  return make_node(std::move(y), {x.ptr(), w.ptr(), b.ptr()}, label, [n, in, out](Node& self) {
    Node& xn = *self.inputs[0];
    Node& wn = *self.inputs[1];
    Node& bn = *self.inputs[2];
    auto gy = std::as_const(self.grad).matrix(n, out);
    if (wn.requires_grad)
      wn.grad_buffer().matrix(in, out).noalias() += xn.value.matrix(n, in).transpose() * gy;
    if (bn.requires_grad)
      Eigen::Map<Eigen::RowVectorXd>(bn.grad_buffer().data(), static_cast<Eigen::Index>(out)) +=
          gy.colwise().sum();
    if (xn.requires_grad)
      xn.grad_buffer().matrix(n, in).noalias() += gy * wn.value.matrix(in, out).transpose();
  });
}

namespace {

struct ConvDims {
  std::size_t n, c, h, w;      // image side of the convolution
  std::size_t k, stride, pad;
  std::size_t ho, wo;          // column grid side
};

// cols[(c*k + ky)*k + kx, col0 + oy*wo + ox] = img[c, oy*s - p + ky, ox*s - p + kx]
void im2col(const double* img, const ConvDims& d, RowMatrix& cols, std::size_t col0) {
  for (std::size_t c = 0; c < d.c; ++c)
    for (std::size_t ky = 0; ky < d.k; ++ky)
      for (std::size_t kx = 0; kx < d.k; ++kx) {
        double* row = cols.data() + ((c * d.k + ky) * d.k + kx) * cols.cols() + col0;
        for (std::size_t oy = 0; oy < d.ho; ++oy) {
          const long iy = static_cast<long>(oy * d.stride + ky) - static_cast<long>(d.pad);
          double* dst = row + oy * d.wo;
          if (iy < 0 || iy >= static_cast<long>(d.h)) {
            std::fill(dst, dst + d.wo, 0.0);
            continue;
          }
          const double* src = img + (c * d.h + static_cast<std::size_t>(iy)) * d.w;
          for (std::size_t ox = 0; ox < d.wo; ++ox) {
            const long ix = static_cast<long>(ox * d.stride + kx) - static_cast<long>(d.pad);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(d.w)) ? 0.0 : src[ix];
          }
        }
      }
}

// Adjoint of im2col: scatter-add columns back into the image.
void col2im(const RowMatrix& cols, std::size_t col0, const ConvDims& d, double* img) {
  for (std::size_t c = 0; c < d.c; ++c)
    for (std::size_t ky = 0; ky < d.k; ++ky)
      for (std::size_t kx = 0; kx < d.k; ++kx) {
        const double* row = cols.data() + ((c * d.k + ky) * d.k + kx) * cols.cols() + col0;
        for (std::size_t oy = 0; oy < d.ho; ++oy) {
          const long iy = static_cast<long>(oy * d.stride + ky) - static_cast<long>(d.pad);
          if (iy < 0 || iy >= static_cast<long>(d.h))
            continue;
          const double* src = row + oy * d.wo;
          double* dst = img + (c * d.h + static_cast<std::size_t>(iy)) * d.w;
          for (std::size_t ox = 0; ox < d.wo; ++ox) {
            const long ix = static_cast<long>(ox * d.stride + kx) - static_cast<long>(d.pad);
            if (ix >= 0 && ix < static_cast<long>(d.w))
              dst[ix] += src[ox];
          }
        }
      }
}

// [N, C, P] <-> [C, N*P] channel-major rearrangement used around the GEMMs.
void batch_to_channel_major(const double* src, std::size_t n, std::size_t c, std::size_t p,
                            double* dst) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      std::copy_n(src + (i * c + ch) * p, p, dst + ch * n * p + i * p);
}

void channel_major_to_batch_add(const double* src, std::size_t n, std::size_t c, std::size_t p,
                                double* dst) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* s = src + ch * n * p + i * p;
      double* o = dst + (i * c + ch) * p;
      for (std::size_t j = 0; j < p; ++j)
        o[j] += s[j];
    }
}

void check_conv_inputs(const Var& x, const Var& w, const Var& b, const std::string& label,
                       std::size_t w_in_axis, std::size_t out_channels) {
  if (x.value().rank() != 4 || w.value().rank() != 4 || b.value().rank() != 1)
    throw UsageError(label + ": expects 4-D input/kernel and 1-D bias");
  if (w.value().dim(w_in_axis) != x.value().dim(1) || w.value().dim(2) != w.value().dim(3) ||
      b.value().dim(0) != out_channels)
    throw UsageError(label + ": shape mismatch x " + shape_string(x.shape()) + ", w " +
                     shape_string(w.shape()) + ", b " + shape_string(b.shape()));
}

} // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, ConvGeometry g, const std::string& label) {
  const std::size_t out_ch = w.value().dim(0);
  check_conv_inputs(x, w, b, label, 1, out_ch);
  if (w.value().dim(2) != g.kernel)
    throw UsageError(label + ": kernel size differs from geometry");
  const auto& xs = x.shape();
  ConvDims d{xs[0], xs[1], xs[2], xs[3], g.kernel, g.stride, g.pad, 0, 0};
  if (d.h + 2 * d.pad < d.k || d.w + 2 * d.pad < d.k || d.stride == 0)
    throw UsageError(label + ": input smaller than kernel");
  d.ho = (d.h + 2 * d.pad - d.k) / d.stride + 1;
  d.wo = (d.w + 2 * d.pad - d.k) / d.stride + 1;
  const std::size_t kk = d.c * d.k * d.k, p = d.ho * d.wo;

  auto cols = std::make_shared<RowMatrix>(kk, d.n * p);
  for (std::size_t i = 0; i < d.n; ++i)
    im2col(x.value().data() + i * d.c * d.h * d.w, d, *cols, i * p);

  RowMatrix y2 = w.value().matrix(out_ch, kk) * *cols;
  for (std::size_t o = 0; o < out_ch; ++o)
    y2.row(static_cast<Eigen::Index>(o)).array() += b.value()[o];
  Tensor y({d.n, out_ch, d.ho, d.wo}, 0.0);
  channel_major_to_batch_add(y2.data(), d.n, out_ch, p, y.data());

  return make_node(std::move(y), {x.ptr(), w.ptr(), b.ptr()}, label,
                   [d, cols, out_ch, kk, p](Node& self) {
                     Node& xn = *self.inputs[0];
                     Node& wn = *self.inputs[1];
                     Node& bn = *self.inputs[2];
                     RowMatrix gy(out_ch, d.n * p);
                     batch_to_channel_major(self.grad.data(), d.n, out_ch, p, gy.data());
                     if (wn.requires_grad)
                       wn.grad_buffer().matrix(out_ch, kk).noalias() += gy * cols->transpose();
                     if (bn.requires_grad) {
                       Tensor& gb = bn.grad_buffer();
                       for (std::size_t o = 0; o < out_ch; ++o)
                         gb[o] += gy.row(static_cast<Eigen::Index>(o)).sum();
                     }
                     if (xn.requires_grad) {
                       RowMatrix gcols = wn.value.matrix(out_ch, kk).transpose() * gy;
                       Tensor& gx = xn.grad_buffer();
                       for (std::size_t i = 0; i < d.n; ++i)
                         col2im(gcols, i * p, d, gx.data() + i * d.c * d.h * d.w);
                     }
                   });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& b, ConvGeometry g,
                     const std::string& label) {
  const std::size_t out_ch = w.value().dim(1);
  check_conv_inputs(x, w, b, label, 0, out_ch);
  if (w.value().dim(2) != g.kernel)
    throw UsageError(label + ": kernel size differs from geometry");
  const auto& xs = x.shape();
  const std::size_t n = xs[0], in_ch = xs[1], h = xs[2], wd = xs[3];
  if ((h - 1) * g.stride + g.kernel < 2 * g.pad + 1 || g.stride == 0)
    throw UsageError(label + ": geometry produces an empty output");
  const std::size_t ho = (h - 1) * g.stride + g.kernel - 2 * g.pad;
  const std::size_t wo = (wd - 1) * g.stride + g.kernel - 2 * g.pad;
  // The output image plays the role of the conv2d input; the input grid is
  // the column grid.
  const ConvDims d{n, out_ch, ho, wo, g.kernel, g.stride, g.pad, h, wd};
  const std::size_t kk = out_ch * g.kernel * g.kernel, p = h * wd;

  auto x2 = std::make_shared<RowMatrix>(in_ch, n * p);
  batch_to_channel_major(x.value().data(), n, in_ch, p, x2->data());
  RowMatrix cols = w.value().matrix(in_ch, kk).transpose() * *x2;

  Tensor y({n, out_ch, ho, wo}, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    col2im(cols, i * p, d, y.data() + i * out_ch * ho * wo);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < out_ch; ++o) {
      double* plane = y.data() + (i * out_ch + o) * ho * wo;
      for (std::size_t j = 0; j < ho * wo; ++j)
        plane[j] += b.value()[o];
    }

  return make_node(std::move(y), {x.ptr(), w.ptr(), b.ptr()}, label,
                   [d, x2, in_ch, kk, p](Node& self) {
                     Node& xn = *self.inputs[0];
                     Node& wn = *self.inputs[1];
                     Node& bn = *self.inputs[2];
                     RowMatrix gcols(kk, d.n * p);
                     for (std::size_t i = 0; i < d.n; ++i)
                       im2col(self.grad.data() + i * d.c * d.h * d.w, d, gcols, i * p);
                     if (wn.requires_grad)
                       wn.grad_buffer().matrix(in_ch, kk).noalias() += *x2 * gcols.transpose();
                     if (bn.requires_grad) {
                       Tensor& gb = bn.grad_buffer();
                       const std::size_t plane = d.h * d.w;
                       for (std::size_t i = 0; i < d.n; ++i)
                         for (std::size_t o = 0; o < d.c; ++o) {
                           const double* gp = self.grad.data() + (i * d.c + o) * plane;
                           double s = 0.0;
                           for (std::size_t j = 0; j < plane; ++j)
                             s += gp[j];
                           gb[o] += s;
                         }
                     }
                     if (xn.requires_grad) {
                       RowMatrix gx2 = wn.value.matrix(in_ch, kk) * gcols;
                       channel_major_to_batch_add(gx2.data(), d.n, in_ch, p,
                                                  xn.grad_buffer().data());
                     }
                   });
}

double bce_loss(double prob, int label) {
  const double p = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  return -(label * std::log(p) + (1 - label) * std::log(1.0 - p));
}

Var bce(const Var& prob, double label, const std::string& label_name) {
  const auto& pv = prob.value();
  const double inv_n = 1.0 / static_cast<double>(pv.numel());
  double loss = 0.0;
  for (double p : pv.values()) {
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    loss -= label * std::log(pc) + (1.0 - label) * std::log(1.0 - pc);
  }
  return make_node(Tensor({1}, loss * inv_n), {prob.ptr()}, label_name,
                   [label, inv_n](Node& self) {
                     Node& pn = *self.inputs[0];
                     Tensor& g = pn.grad_buffer();
                     for (std::size_t i = 0; i < g.numel(); ++i) {
                       const double p = pn.value[i];
                       if (p < kProbClamp || p > 1.0 - kProbClamp)
                         continue;
                       g[i] += self.grad[0] * inv_n * (-label / p + (1.0 - label) / (1.0 - p));
                     }
                   });
}

Var sigmoid_bce(const Var& logits, double label, const std::string& label_name) {
  const auto& zv = logits.value();
  const double inv_n = 1.0 / static_cast<double>(zv.numel());
  auto probs = std::make_shared<std::vector<double>>(zv.numel());
  double loss = 0.0;
  for (std::size_t i = 0; i < zv.numel(); ++i) {
    const double p = stable_sigmoid(zv[i]);
    (*probs)[i] = p;
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    loss -= label * std::log(pc) + (1.0 - label) * std::log(1.0 - pc);
  }
  return make_node(Tensor({1}, loss * inv_n), {logits.ptr()}, label_name,
                   [label, inv_n, probs](Node& self) {
                     Tensor& g = self.inputs[0]->grad_buffer();
                     for (std::size_t i = 0; i < g.numel(); ++i)
                       g[i] += self.grad[0] * inv_n * ((*probs)[i] - label);
                   });
}

} // namespace skyaug::ag
