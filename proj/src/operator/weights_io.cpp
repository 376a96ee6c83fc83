#include "latefuse/operator/weights_io.hpp"

#include "latefuse/common/binary_io.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::op {

using json = nlohmann::ordered_json;

json write_weights(const std::filesystem::path& bin, const std::vector<NamedParameter>& params) {
  std::vector<double> flat;
  json arrays = json::array();
  for (const auto& p : params) {
    arrays.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"offset", flat.size()}});
    const auto values = p.value.value().data();
    flat.insert(flat.end(), values.begin(), values.end());
  }
  const auto bytes = io::encode_f64(flat);
  io::write_file(bin, bytes);
  return json{{"file", bin.filename().string()},
              {"dtype", "float64"},
              {"count", flat.size()},
              {"crc32", io::crc32_hex(bytes)},
              {"arrays", arrays}};
}

void read_weights(const std::filesystem::path& bin, const json& index, const std::vector<NamedParameter>& params) {
  const auto bytes = io::read_file(bin);
  if (io::crc32_hex(bytes) != index.at("crc32").get<std::string>()) {
    throw ChecksumError("weights: checksum mismatch in " + bin.string());
  }
  const auto flat = io::decode_f64(bytes);
  if (flat.size() != index.at("count").get<std::size_t>()) throw FormatError("weights: element count mismatch");
  const auto& arrays = index.at("arrays");
  if (arrays.size() != params.size()) throw FormatError("weights: array count differs from the model");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = arrays[i];
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<Shape>();
    const auto offset = entry.at("offset").get<std::size_t>();
    if (name != params[i].name || shape != params[i].value.shape()) {
      throw FormatError("weights: array " + std::to_string(i) + " is " + name + ad::shape_str(shape) +
                        ", model expects " + params[i].name + ad::shape_str(params[i].value.shape()));
    }
    const std::size_t n = ad::shape_numel(shape);
    if (offset + n > flat.size()) throw FormatError("weights: array " + name + " runs past the end of the file");
    Variable v = params[i].value;
    v.set_value(Tensor(shape, std::vector<double>(flat.begin() + offset, flat.begin() + offset + n)));
  }
}

json to_json(const BackboneConfig& c) {
  return json{{"in_channels", c.in_channels}, {"out_channels", c.out_channels}, {"width", c.width},
              {"modes", c.modes},             {"levels", c.levels},             {"spatial_dims", c.spatial_dims},
              {"activation", "gelu"},         {"init", {{"pointwise", "uniform(+-1/sqrt(fan_in))"},
                                                        {"spectral", "uniform(0,1)/(in*out)"}}}};
}

BackboneConfig backbone_from_json(const json& j) {
  BackboneConfig c;
  c.in_channels = j.at("in_channels").get<std::size_t>();
  c.out_channels = j.at("out_channels").get<std::size_t>();
  c.width = j.at("width").get<std::size_t>();
  c.modes = j.at("modes").get<std::size_t>();
  c.levels = j.at("levels").get<std::size_t>();
  c.spatial_dims = j.at("spatial_dims").get<std::size_t>();
  c.validate();
  return c;
}

}  // namespace latefuse::op
