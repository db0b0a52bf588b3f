#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace memu {

/// Fully connected network with tanh hidden units and a linear output layer;
/// no hidden layers gives a linear policy. Parameters are stored layer by
/// layer as a row-major weight matrix followed by the bias vector.
class PolicySpec {
 public:
  PolicySpec() = default;
  PolicySpec(std::size_t input_dim, std::size_t output_dim,
             std::vector<std::size_t> hidden);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  const std::vector<std::size_t>& hidden() const { return hidden_; }
  std::size_t param_count() const;

  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }
  void set_params(std::span<const double> values);

  void forward(std::span<const double> input, std::span<double> output) const;

  std::string to_json() const;
  static PolicySpec from_json(const std::string& text);

 private:
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<std::size_t> hidden_;
  std::vector<double> params_;
};

}  // namespace memu
