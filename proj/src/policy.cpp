#include "memu/policy.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <json.hpp>

#include "memu/error.hpp"

namespace memu {

PolicySpec::PolicySpec(std::size_t input_dim, std::size_t output_dim,
                       std::vector<std::size_t> hidden)
    : input_dim_(input_dim), output_dim_(output_dim), hidden_(std::move(hidden)) {
  require(input_dim_ > 0 && output_dim_ > 0, "policy: dimensions must be positive");
  for (std::size_t h : hidden_) require(h > 0, "policy: hidden sizes must be positive");
  params_.assign(param_count(), 0.0);
}

std::size_t PolicySpec::param_count() const {
  std::size_t count = 0;
  std::size_t in = input_dim_;
  for (std::size_t h : hidden_) {
    count += h * in + h;
    in = h;
  }
  return count + output_dim_ * in + output_dim_;
}

void PolicySpec::set_params(std::span<const double> values) {
  if (values.size() != param_count())
    throw std::invalid_argument("policy: expected " + std::to_string(param_count()) +
                                " parameters, got " + std::to_string(values.size()));
  params_.assign(values.begin(), values.end());
}

void PolicySpec::forward(std::span<const double> input, std::span<double> output) const {
  if (input.size() != input_dim_)
    throw std::invalid_argument("policy: expected " + std::to_string(input_dim_) +
                                " inputs, got " + std::to_string(input.size()));
  if (output.size() != output_dim_)
    throw std::invalid_argument("policy: output size mismatch");

  thread_local std::vector<double> scratch_a;
  thread_local std::vector<double> scratch_b;
  scratch_a.assign(input.begin(), input.end());
  const double* w = params_.data();
  auto layer = [&](const std::vector<double>& x, std::vector<double>& y, std::size_t n,
                   bool squash) {
    const std::size_t m = x.size();
    y.assign(n, 0.0);
    const double* bias = w + n * m;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = bias[i];
      const double* row = w + i * m;
      for (std::size_t j = 0; j < m; ++j) acc += row[j] * x[j];
      y[i] = squash ? std::tanh(acc) : acc;
    }
    w = bias + n;
  };
  for (std::size_t h : hidden_) {
    layer(scratch_a, scratch_b, h, true);
    scratch_a.swap(scratch_b);
  }
  layer(scratch_a, scratch_b, output_dim_, false);
  for (std::size_t i = 0; i < output_dim_; ++i) output[i] = scratch_b[i];
}

std::string PolicySpec::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "memu-policy";
  j["version"] = 1;
  j["input_dim"] = input_dim_;
  j["output_dim"] = output_dim_;
  j["hidden"] = hidden_;
  j["activation"] = "tanh";
  auto& params = j["params"] = nlohmann::ordered_json::array();
  // Shortest round-trip representation, so a reloaded policy is bit-identical.
  for (double p : params_) params.push_back(p);
  return j.dump(1) + "\n";
}

PolicySpec PolicySpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("policy file is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "memu-policy") throw Error("not a memu policy file");
  PolicySpec spec(j.at("input_dim").get<std::size_t>(), j.at("output_dim").get<std::size_t>(),
                  j.at("hidden").get<std::vector<std::size_t>>());
  spec.set_params(j.at("params").get<std::vector<double>>());
  return spec;
}

}  // namespace memu
