#include "cli_support.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iostream>
#include <sstream>

#ifndef TAGREC_VERSION
#define TAGREC_VERSION "0.0.0"
#endif

namespace tagrec::cli {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string file_digest(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error("write failed: " + path.string());
}

Output::Output(const std::optional<std::filesystem::path>& path) : path_(path) {
  if (path_ && *path_ != "-") {
    file_ = std::make_unique<std::ofstream>(*path_, std::ios::binary);
    if (!*file_) throw Error("cannot write " + path_->string());
  }
}

std::ostream& Output::stream() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }

void Output::close() {
  if (!stream().flush()) throw Error("write failed" + (path_ ? ": " + path_->string() : std::string()));
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "tagrec";
  j["version"] = TAGREC_VERSION;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  auto& in = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [role, path] : inputs)
    in.push_back({{"role", role}, {"path", path}, {"sha256", file_digest(path)}});
  return j;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_text_file(path, manifest.to_json().dump(2) + "\n");
}

std::string describe(const MiningParams& p) {
  return "minsup=" + p.min_support.to_string() + " maxlen=" + std::to_string(p.max_len) +
         " top_m=" + std::to_string(p.top_m) +
         " closedness=" + (p.closedness == Closedness::kGlobal ? "global" : "bounded");
}

ArtifactCache::ArtifactCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) std::filesystem::create_directories(*dir_);
}

std::string ArtifactCache::key(std::string_view kind, std::string_view corpus_digest, std::string_view params) {
  std::string material;
  material.append(kind).append("\n").append(corpus_digest).append("\n").append(params);
  return sha256_hex(material).substr(0, 32);
}

std::optional<std::filesystem::path> ArtifactCache::path(const std::string& key, std::string_view ext) const {
  if (!dir_) return std::nullopt;
  return *dir_ / (key + std::string(ext));
}

namespace {

template <typename Reader>
auto load(const std::optional<std::filesystem::path>& p, Reader&& read) -> std::optional<decltype(read(std::declval<std::istream&>()))> {
  if (!p || !std::filesystem::exists(*p)) return std::nullopt;
  std::ifstream in(*p, std::ios::binary);
  try {
    return read(in);
  } catch (const std::exception& e) {
    std::cerr << "warning: ignoring unreadable cache entry " << p->string() << ": " << e.what() << '\n';
    return std::nullopt;
  }
}

template <typename Writer>
void store(const std::optional<std::filesystem::path>& p, Writer&& write) {
  if (!p) return;
  // Write-then-rename keeps concurrent readers from seeing partial files.
  auto tmp = *p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    write(out);
    if (!out.flush()) throw Error("cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, *p);
}

}  // namespace

std::optional<FrequentTagsetCollection> ArtifactCache::load_frequent(const std::string& key,
                                                                     const Dictionary& vocabulary) const {
  return load(path(key, ".closed"), [&](std::istream& in) { return read_frequent(in, vocabulary); });
}

void ArtifactCache::store_frequent(const std::string& key, const FrequentTagsetCollection& f,
                                   const Dictionary& vocabulary) const {
  store(path(key, ".closed"), [&](std::ostream& out) { write_frequent(f, vocabulary, out); });
}

std::optional<CooccurrenceIndex> ArtifactCache::load_cooccurrence(const std::string& key,
                                                                  const Dictionary& vocabulary) const {
  return load(path(key, ".cooc"), [&](std::istream& in) { return read_cooccurrence(in, vocabulary); });
}

void ArtifactCache::store_cooccurrence(const std::string& key, const CooccurrenceIndex& index,
                                       const Dictionary& vocabulary) const {
  store(path(key, ".cooc"), [&](std::ostream& out) { write_cooccurrence(index, vocabulary, out); });
}

std::optional<CodeTable> ArtifactCache::load_code_table(const std::string& key, const Dictionary& vocabulary) const {
  return load(path(key, ".ct"), [&](std::istream& in) { return read_code_table(in, vocabulary); });
}

void ArtifactCache::store_code_table(const std::string& key, const CodeTable& ct, const Dictionary& vocabulary) const {
  store(path(key, ".ct"), [&](std::ostream& out) { write_code_table(ct, vocabulary, out); });
}

}  // namespace tagrec::cli
