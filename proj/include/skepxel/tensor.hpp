#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace skepxel {

// Dense H x W x C tensor, row-major with the channel index fastest.
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t height, std::size_t width, std::size_t channels,
          T fill = T{})
      : h_(height), w_(width), c_(channels),
        data_(height * width * channels, fill) {}

  std::size_t height() const noexcept { return h_; }
  std::size_t width() const noexcept { return w_; }
  std::size_t channels() const noexcept { return c_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(std::size_t row, std::size_t col,
                    std::size_t ch) const noexcept {
    return (row * w_ + col) * c_ + ch;
  }
  T& operator()(std::size_t row, std::size_t col, std::size_t ch) noexcept {
    return data_[index(row, col, ch)];
  }
  const T& operator()(std::size_t row, std::size_t col,
                      std::size_t ch) const noexcept {
    return data_[index(row, col, ch)];
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::size_t c_ = 0;
  std::vector<T> data_;
};

using ImageF = Tensor3<float>;
using ImageU8 = Tensor3<std::uint8_t>;

}  // namespace skepxel
