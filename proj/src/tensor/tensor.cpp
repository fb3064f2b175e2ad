// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/tensor.h"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "radmap/errors.h"

namespace radmap {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  for (std::size_t extent : shape) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
  }
  auto impl = std::make_shared<Impl>();
  impl->data.assign(shape_numel(shape), value);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t extent : shape) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
  }
  if (values.size() != shape_numel(shape)) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
  }
  auto impl = std::make_shared<Impl>();
  impl->shape = std::move(shape);
  impl->data.assign(values.begin(), values.end());
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

Tensor::Impl& Tensor::impl() const {
  if (!impl_) throw UsageError("use of an undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return impl().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return impl().data.size(); }

std::span<double> Tensor::data() { return impl().data; }
std::span<const double> Tensor::data() const { return impl().data; }

double Tensor::item() const {
  if (numel() != 1) throw UsageError("item() on tensor of shape " + shape_str(shape()));
  return impl().data[0];
}

bool Tensor::requires_grad() const { return impl().requires_grad; }
void Tensor::set_requires_grad(bool flag) const { impl().requires_grad = flag; }

bool Tensor::has_grad() const { return !impl().grad.empty(); }

std::span<const double> Tensor::grad() const { return impl().grad; }

std::span<double> Tensor::grad_buffer() const {
  Impl& i = impl();
  if (i.grad.empty()) i.grad.assign(i.data.size(), 0.0);
  return i.grad;
}

void Tensor::zero_grad() const {
  Impl& i = impl();
  std::fill(i.grad.begin(), i.grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  const Impl& i = impl();
  auto copy = std::make_shared<Impl>();
  copy->shape = i.shape;
  copy->data = i.data;
  return Tensor(std::move(copy));
}

bool Tape::wants(std::initializer_list<const Tensor*> inputs) const {
  if (!enabled_) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->defined() && t->requires_grad(); });
}

void Tape::record(std::string_view op, std::vector<Tensor> inputs, Tensor output,
                  std::function<void()> backward) {
  output.set_requires_grad(true);
  nodes_.push_back(Node{op, std::move(inputs), std::move(output), std::move(backward)});
}

void backward(Tape& tape, const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw UsageError("backward() needs a single-element loss, got " +
                     (loss.defined() ? shape_str(loss.shape()) : std::string("undefined")));
  }
  const auto& nodes = tape.nodes();
  std::ptrdiff_t last = -1;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(nodes.size()) - 1; i >= 0; --i) {
    if (nodes[i].output.same_storage(loss)) {
      last = i;
      break;
    }
  }
  if (last < 0 && !loss.requires_grad()) {
    throw UsageError("backward() on a loss that was not recorded on this tape");
  }
  Tensor root = loss;
  root.grad_buffer()[0] += 1.0;
  for (std::ptrdiff_t i = last; i >= 0; --i) {
    const Tape::Node& node = nodes[i];
    if (!node.output.has_grad()) continue;  // not reachable from the loss
    node.backward();
  }
}

}  // namespace radmap
