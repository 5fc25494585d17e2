#include "cropyield/model/config.hpp"

#include <sstream>

#include "cropyield/errors.hpp"
#include "cropyield/layers/conv.hpp"

namespace cropyield {

std::vector<std::pair<std::size_t, std::size_t>> ModelConfig::spatial_chain() const {
  std::vector<std::pair<std::size_t, std::size_t>> chain{{input_height, input_width}};
  for (std::size_t l = 0; l < conv_layers; ++l) {
    const auto [h, w] = chain.back();
    chain.emplace_back(conv_output_extent(h, kernel, stride), conv_output_extent(w, kernel, stride));
  }
  return chain;
}

std::size_t ModelConfig::flatten_dim() const {
  const auto [h, w] = spatial_chain().back();
  return h * w * (conv_layers ? conv_filters : bands);
}

void ModelConfig::validate() const {
  if (input_height == 0 || input_width == 0 || bands == 0 || timesteps == 0) {
    throw InputError("model input dimensions must be positive");
  }
  if (conv_filters == 0 || kernel == 0 || stride == 0) throw InputError("convolution sizes must be positive");
  if (lstm_layers == 0 || lstm_hidden == 0) throw InputError("the model needs at least one LSTM layer");
  if (head_hidden1 == 0 || head_hidden2 == 0) throw InputError("head widths must be positive");
  if (!(dropout_keep > 0.0f && dropout_keep <= 1.0f)) throw InputError("dropout_keep must lie in (0, 1]");
  if (!(leaky_slope >= 0.0f)) throw InputError("leaky_slope must be non-negative");
  spatial_chain();  // throws ShapeError when the stack does not fit the input
}

namespace {

template <typename Fn>
void for_each_field(const ModelConfig& c, Fn&& fn) {
  fn("input_height", static_cast<double>(c.input_height));
  fn("input_width", static_cast<double>(c.input_width));
  fn("bands", static_cast<double>(c.bands));
  fn("timesteps", static_cast<double>(c.timesteps));
  fn("conv_layers", static_cast<double>(c.conv_layers));
  fn("conv_filters", static_cast<double>(c.conv_filters));
  fn("kernel", static_cast<double>(c.kernel));
  fn("stride", static_cast<double>(c.stride));
  fn("lstm_layers", static_cast<double>(c.lstm_layers));
  fn("lstm_hidden", static_cast<double>(c.lstm_hidden));
  fn("head_hidden1", static_cast<double>(c.head_hidden1));
  fn("head_hidden2", static_cast<double>(c.head_hidden2));
  fn("dropout_keep", static_cast<double>(c.dropout_keep));
  fn("leaky_slope", static_cast<double>(c.leaky_slope));
}

}  // namespace

std::string describe(const ModelConfig& config) {
  std::ostringstream out;
  for_each_field(config, [&out](const char* name, double v) { out << name << " = " << v << "\n"; });
  return out.str();
}

std::string first_difference(const ModelConfig& a, const ModelConfig& b) {
  std::vector<std::pair<std::string, double>> fa, fb;
  for_each_field(a, [&fa](const char* n, double v) { fa.emplace_back(n, v); });
  for_each_field(b, [&fb](const char* n, double v) { fb.emplace_back(n, v); });
  for (std::size_t i = 0; i < fa.size(); ++i) {
    if (fa[i].second != fb[i].second) return fa[i].first;
  }
  return {};
}

}  // namespace cropyield
