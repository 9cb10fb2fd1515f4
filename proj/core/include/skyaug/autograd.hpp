#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "skyaug/tensor.hpp"

// Minimal reverse-mode differentiation over whole tensors. Every op
// records its inputs and a closure that pushes the output gradient back
// into them; backward() walks the recorded graph in reverse topological
// order. Forward values and backward gradients are checked for NaN/Inf
// and the offending op label is reported.
namespace skyaug::ag {

struct Node {
  Tensor value;
  Tensor grad; // allocated on first accumulation
  bool requires_grad = false;
  std::string label;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_buffer();
};

class Var {
public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  /// Trainable or constant leaf.
  static Var leaf(Tensor value, bool requires_grad, std::string label = "leaf");
  static Var constant(Tensor value, std::string label = "const") {
    return leaf(std::move(value), false, std::move(label));
  }

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  /// Gradient after backward(); zeros if nothing reached this node.
  const Tensor& grad() const;
  void zero_grad();
  bool requires_grad() const { return node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  const std::string& label() const { return node_->label; }
  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& ptr() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

private:
  std::shared_ptr<Node> node_;
};

/// Seeds d(loss)/d(loss) = 1 and accumulates gradients into every node
/// that requires them. `loss` must hold a single element.
void backward(const Var& loss);

/// Copy of the value with no history.
Var detach(const Var& a);

Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double c);
Var square(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);
Var reshape(const Var& a, Shape shape);

Var relu(const Var& a, const std::string& label = "relu");
Var leaky_relu(const Var& a, double slope, const std::string& label = "leaky_relu");
Var tanh(const Var& a, const std::string& label = "tanh");
Var sigmoid(const Var& a, const std::string& label = "sigmoid");

/// x [N, in] * w [in, out] + b [out]
Var linear(const Var& x, const Var& w, const Var& b, const std::string& label = "linear");

struct ConvGeometry {
  std::size_t kernel = 4;
  std::size_t stride = 2;
  std::size_t pad = 1;
};

/// x [N, C, H, W], w [O, C, k, k], b [O] -> [N, O, Ho, Wo]
Var conv2d(const Var& x, const Var& w, const Var& b, ConvGeometry g,
           const std::string& label = "conv2d");

/// x [N, Cin, H, W], w [Cin, Cout, k, k], b [Cout] -> [N, Cout, Ho, Wo]
/// with Ho = (H - 1) * stride - 2 * pad + kernel. This is the adjoint of
/// conv2d with the same geometry.
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, ConvGeometry g,
                     const std::string& label = "conv_transpose2d");

/// Probabilities below 1e-7 or above 1 - 1e-7 are clamped before the log.
inline constexpr double kProbClamp = 1e-7;

/// Mean binary cross-entropy of probabilities against a constant label.
/// The gradient is that of the clamped loss (zero where the clamp binds).
Var bce(const Var& prob, double label, const std::string& label_name = "bce");

/// Mean of bce(sigmoid(logits), label) evaluated on clamped
/// probabilities. The gradient is sigmoid(z) - label per element (divided
/// by N), which equals the composed gradient wherever the clamp is inactive
/// and keeps a saturated discriminator from zeroing the generator signal.
Var sigmoid_bce(const Var& logits, double label, const std::string& label_name = "sigmoid_bce");

/// Scalar BCE on a single probability, clamped.
double bce_loss(double prob, int label);

} // namespace skyaug::ag
