// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace radmap {

using Shape = std::vector<std::size_t>;

// 64-byte aligned storage. Vectorised reductions peel an unaligned head,
// so without a fixed base alignment the summation order (and the last bits
// of the result) would depend on where the heap put the buffer.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major array of doubles with an optional gradient buffer.
///
/// Tensor is a shared handle: copies alias the same storage, so a parameter
/// held by a model and the same parameter held by an optimizer see the same
/// values. Use clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t ndim() const { return shape().size(); }
  std::size_t numel() const;

  std::span<double> data();
  std::span<const double> data() const;
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag) const;

  bool has_grad() const;
  // Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  // Allocates a zero gradient buffer on first use. Const because Tensor is
  // a handle; the gradient lives in the shared storage.
  std::span<double> grad_buffer() const;
  void zero_grad() const;

  // Independent copy of the values, detached from any gradient history.
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    Shape shape;
    Buffer data;
    Buffer grad;
    bool requires_grad = false;
  };

  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  Impl& impl() const;

  std::shared_ptr<Impl> impl_;
};

/// Append-only record of differentiable operations.
///
/// An op is recorded only when at least one of its inputs requires a
/// gradient; its output then requires a gradient too. Nodes are appended in
/// execution order, which is a valid topological order, so backward() just
/// walks the list in reverse.
class Tape {
 public:
  struct Node {
    std::string_view op;
    std::vector<Tensor> inputs;
    Tensor output;
    // Reads output's gradient, accumulates into inputs' gradients.
    std::function<void()> backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Whether an op with these inputs should be recorded.
  bool wants(std::initializer_list<const Tensor*> inputs) const;

  void record(std::string_view op, std::vector<Tensor> inputs, Tensor output,
              std::function<void()> backward);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  void clear() { nodes_.clear(); }

  // A disabled tape records nothing; used for inference.
  void set_enabled(bool enabled) { enabled_ = enabled; }
  bool enabled() const { return enabled_; }

 private:
  std::vector<Node> nodes_;
  bool enabled_ = true;
};

/// Reverse-mode sweep from a single-element loss. Gradients accumulate into
/// existing buffers, so call zero_grad() on parameters between steps.
void backward(Tape& tape, const Tensor& loss);

}  // namespace radmap
