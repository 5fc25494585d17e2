#include "cropyield/model/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "cropyield/binary_io.hpp"

namespace cropyield {

namespace {

void put_tensor(std::ostream& out, const Tensor& t) {
  io::put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) io::put_u32(out, static_cast<std::uint32_t>(d));
  io::put_f32_array(out, t.data(), t.size());
}

void get_tensor(io::Reader& in, Tensor& into, std::size_t index) {
  const std::size_t at = in.offset();
  const std::uint32_t rank = in.u32("tensor rank");
  if (rank != into.rank()) {
    throw FormatError(in.source() + ": tensor " + std::to_string(index) + " has rank " + std::to_string(rank) +
                          ", expected " + std::to_string(into.rank()),
                      at);
  }
  for (std::size_t a = 0; a < rank; ++a) {
    const std::uint32_t d = in.u32("tensor dimension");
    if (d != into.dim(a)) {
      throw FormatError(in.source() + ": tensor " + std::to_string(index) + " has shape mismatch, expected " +
                            to_string(into.shape()),
                        in.offset() - 4);
    }
  }
  in.f32_array(into.data(), into.size(), "tensor values");
}

std::size_t tensor_count(const ModelParams<float>& p) {
  std::size_t n = 0;
  p.visit([&n](const Tensor&) { ++n; });
  return n + 3;
}

}  // namespace

void write_params(std::ostream& out, const ModelParams<float>& params) {
  const auto& c = params.config;
  io::put_bytes(out, kCheckpointMagic);
  io::put_u32(out, kCheckpointVersion);
  for (std::size_t v : {c.input_height, c.input_width, c.bands, c.timesteps, c.conv_layers, c.conv_filters, c.kernel,
                        c.stride, c.lstm_layers, c.lstm_hidden, c.head_hidden1, c.head_hidden2}) {
    io::put_u32(out, static_cast<std::uint32_t>(v));
  }
  io::put_f32(out, c.dropout_keep);
  io::put_f32(out, c.leaky_slope);
  io::put_u32(out, static_cast<std::uint32_t>(tensor_count(params)));
  params.visit([&out](const Tensor& t) { put_tensor(out, t); });
  put_tensor(out, params.input_mean);
  put_tensor(out, params.input_std);
  put_tensor(out, Tensor::vector({params.label_mean, params.label_std}));
}

ModelParams<float> read_params(std::istream& in, const std::string& source) {
  io::Reader r(in, source);
  r.expect_magic(kCheckpointMagic);
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError(source + ": unsupported checkpoint version " + std::to_string(version), version_at);
  }
  ModelConfig c;
  for (std::size_t* field : {&c.input_height, &c.input_width, &c.bands, &c.timesteps, &c.conv_layers,
                             &c.conv_filters, &c.kernel, &c.stride, &c.lstm_layers, &c.lstm_hidden, &c.head_hidden1,
                             &c.head_hidden2}) {
    *field = r.u32("model config");
  }
  c.dropout_keep = r.f32("model config");
  c.leaky_slope = r.f32("model config");
  const std::size_t config_end = r.offset();

  ModelParams<float> params;
  try {
    params = ModelParams<float>::zeros(c);
  } catch (const Error& e) {
    throw FormatError(source + ": invalid model config: " + e.what(), config_end);
  }

  const std::size_t count_at = r.offset();
  const std::uint32_t count = r.u32("tensor count");
  if (count != tensor_count(params)) {
    throw FormatError(source + ": checkpoint holds " + std::to_string(count) + " tensors, config implies " +
                          std::to_string(tensor_count(params)),
                      count_at);
  }
  std::size_t index = 0;
  params.visit([&](Tensor& t) { get_tensor(r, t, index++); });
  get_tensor(r, params.input_mean, index++);
  get_tensor(r, params.input_std, index++);
  Tensor labels({2});
  get_tensor(r, labels, index++);
  params.label_mean = labels[0];
  params.label_std = labels[1];
  r.expect_end();
  return params;
}

void save_params(const ModelParams<float>& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open checkpoint for writing: " + path.string());
  write_params(out, params);
  if (!out) throw InputError("failed writing checkpoint: " + path.string());
}

ModelParams<float> load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint: " + path.string());
  return read_params(in, path.string());
}

ModelParams<float> load_params(const std::filesystem::path& path, const ModelConfig& expected) {
  ModelParams<float> params = load_params(path);
  const std::string field = first_difference(params.config, expected);
  if (!field.empty()) {
    throw ConfigMismatchError(path.string() + ": checkpoint was built for a different model (" + field + ")", 8);
  }
  return params;
}

}  // namespace cropyield
