#include "melodist/neural/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "melodist/error.hpp"

namespace melodist {
namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic = {'M', 'E', 'L', 'O', 'D', 'I', 'S', 'T'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::ostream& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes.data(), 8);
}

void read_exact(std::istream& in, char* dst, std::size_t n) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw Error(ErrorCode::CorruptFile, "checkpoint truncated");
}

}  // namespace

void save_model(std::ostream& out, const ModelParams& params) {
  validate(params);
  const auto& a = params.arch;
  json vocab = json::array();
  for (const auto& t : params.vocabulary.tokens()) vocab.push_back(to_string(t));
  const json header = {
      {"format", "melodist-checkpoint"},
      {"version", kCheckpointVersion},
      {"mode", std::string(to_string(a.mode))},
      {"layers", a.layers},
      {"hidden", a.hidden},
      {"features", a.features},
      {"alphabet", a.alphabet},
      {"length", a.length},
      {"num_labels", a.num_labels},
      {"label_dim", a.label_dim},
      {"feed_features", a.feed_features},
      {"label_base", params.label_base},
      {"seed", params.seed},
      {"vocabulary", vocab},
      {"weight_count", params.weights.size()},
  };
  const std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double w : params.weights) put_f64(out, w);
  if (!out) throw Error(ErrorCode::Io, "failed writing checkpoint");
}

void save_model(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  save_model(out, params);
}

ModelParams load_model(std::istream& in) {
  std::array<char, 8> magic{};
  read_exact(in, magic.data(), magic.size());
  if (magic != kMagic) throw Error(ErrorCode::CorruptFile, "not a checkpoint (bad magic bytes)");
  std::array<unsigned char, 4> len_bytes{};
  read_exact(in, reinterpret_cast<char*>(len_bytes.data()), 4);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(len_bytes[static_cast<std::size_t>(i)]) << (8 * i);
  if (len > (1u << 26)) throw Error(ErrorCode::CorruptFile, "implausible header length");
  std::string text(len, '\0');
  read_exact(in, text.data(), len);

  ModelParams p;
  std::size_t count = 0;
  try {
    const json h = json::parse(text);
    if (h.at("format").get<std::string>() != "melodist-checkpoint") {
      throw Error(ErrorCode::CorruptFile, "unexpected format tag");
    }
    if (h.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(h.at("version").get<int>()) +
                                                  ", expected " + std::to_string(kCheckpointVersion));
    }
    auto& a = p.arch;
    a.mode = parse_mode(h.at("mode").get<std::string>());
    a.layers = h.at("layers").get<int>();
    a.hidden = h.at("hidden").get<int>();
    a.features = h.at("features").get<int>();
    a.alphabet = h.at("alphabet").get<int>();
    a.length = h.at("length").get<int>();
    a.num_labels = h.at("num_labels").get<int>();
    a.label_dim = h.at("label_dim").get<int>();
    a.feed_features = h.at("feed_features").get<bool>();
    p.label_base = h.at("label_base").get<int>();
    p.seed = h.at("seed").get<std::uint64_t>();
    std::vector<Token> tokens;
    for (const auto& t : h.at("vocabulary")) tokens.push_back(parse_token(t.get<std::string>()));
    p.vocabulary = Vocabulary(tokens);
    count = h.at("weight_count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("bad checkpoint header: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptFile) throw;
    throw Error(ErrorCode::CorruptFile, std::string("bad checkpoint header: ") + e.what());
  }
  if (static_cast<std::size_t>(p.arch.alphabet) != p.vocabulary.size()) {
    throw Error(ErrorCode::ShapeMismatch, "header alphabet does not match its vocabulary");
  }
  if (count != weight_count(p.arch)) {
    throw Error(ErrorCode::ShapeMismatch, "header declares " + std::to_string(count) +
                                              " weights but the architecture needs " +
                                              std::to_string(weight_count(p.arch)));
  }
  p.weights.resize(count);
  std::array<unsigned char, 8> b{};
  for (auto& w : p.weights) {
    read_exact(in, reinterpret_cast<char*>(b.data()), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    w = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::CorruptFile, "trailing bytes after weights");
  validate(p);
  return p;
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return load_model(in);
}

}  // namespace melodist
