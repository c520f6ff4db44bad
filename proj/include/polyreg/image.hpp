#pragma once

#include <string>

#include "polyreg/error.hpp"
#include "polyreg/types.hpp"

namespace polyreg {

// Real-valued image, row-major, nominal intensity range [0, 1].
struct Image {
  int h = 0;
  int w = 0;
  Vec data;

  Image() = default;
  Image(int height, int width, double fill = 0.0) : h(height), w(width), data(Vec::Constant(Index{height} * width, fill)) {}
  Image(int height, int width, Vec values) : h(height), w(width), data(std::move(values)) {
    if (data.size() != Index{h} * w) throw DimensionError("Image: data length does not match h*w");
  }

  Index size() const { return data.size(); }
  double& operator()(int i, int j) { return data[Index{i} * w + j]; }
  double operator()(int i, int j) const { return data[Index{i} * w + j]; }
  bool same_shape(const Image& other) const { return h == other.h && w == other.w; }
};

// Stack of feature channels of a common image shape, stored channel-major.
struct ChannelStack {
  int channels = 0;
  int h = 0;
  int w = 0;
  Vec data;

  ChannelStack() = default;
  ChannelStack(int n_channels, int height, int width)
      : channels(n_channels), h(height), w(width), data(Vec::Zero(Index{n_channels} * height * width)) {}

  Index pixels() const { return Index{h} * w; }
  auto channel(int c) { return data.segment(c * pixels(), pixels()); }
  auto channel(int c) const { return data.segment(c * pixels(), pixels()); }
};

inline void require_same_shape(const Image& a, const Image& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw DimensionError(what + ": image shapes differ (" + std::to_string(a.h) + "x" + std::to_string(a.w) +
                         " vs " + std::to_string(b.h) + "x" + std::to_string(b.w) + ")");
  }
}

}  // namespace polyreg
