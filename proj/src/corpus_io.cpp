#include "melodist/corpus_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "melodist/error.hpp"

namespace melodist {

using nlohmann::json;

namespace {

Melody parse_line(const std::string& line) {
  const json obj = json::parse(line);
  if (!obj.is_object() || !obj.contains("tokens") || !obj["tokens"].is_array()) {
    throw Error(ErrorCode::Parse, "expected an object with a \"tokens\" array");
  }
  Melody m;
  if (obj.contains("id")) {
    m.id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
  }
  for (const auto& t : obj["tokens"]) {
    if (!t.is_string()) throw Error(ErrorCode::Parse, "token is not a string");
    m.tokens.push_back(parse_token(t.get<std::string>()));
  }
  return m;
}

}  // namespace

std::vector<Melody> read_melodies(std::istream& in) {
  std::vector<Melody> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_line(line));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Melody> read_melodies(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_melodies(in);
}

void write_melodies(std::ostream& out, const std::vector<Melody>& melodies) {
  for (const auto& m : melodies) {
    json tokens = json::array();
    for (const auto& t : m.tokens) tokens.push_back(to_string(t));
    out << json{{"id", m.id}, {"tokens", tokens}}.dump() << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  std::vector<Melody> melodies;
  melodies.reserve(corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k) melodies.push_back({corpus.ids[k], corpus.sequences[k]});
  write_melodies(out, melodies);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Corpus corpus_from_melodies(const std::vector<Melody>& melodies, int length, int hop) {
  std::vector<TokenSequence> sequences;
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < melodies.size(); ++k) {
    const auto& m = melodies[k];
    const std::string base = m.id.empty() ? std::to_string(k) : m.id;
    if (length == 0) {
      sequences.push_back(m.tokens);
      ids.push_back(base);
      continue;
    }
    const std::vector<TokenSequence> one{m.tokens};
    auto windows = sliding_windows(one, length, hop);
    for (std::size_t w = 0; w < windows.size(); ++w) {
      ids.push_back(base + "@" + std::to_string(w * static_cast<std::size_t>(hop)));
      sequences.push_back(std::move(windows[w]));
    }
  }
  return make_corpus(std::move(sequences), std::move(ids));
}

Corpus load_corpus(const std::filesystem::path& path, int length, int hop) {
  return corpus_from_melodies(read_melodies(path), length, hop);
}

}  // namespace melodist
