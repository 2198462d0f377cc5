#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tagrec/codetable.hpp"
#include "tagrec/corpus.hpp"
#include "tagrec/miner.hpp"

namespace tagrec::cli {

std::string sha256_hex(std::string_view bytes);
/// Digest of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

/// Destination that is either stdout or a file, chosen by `--out`.
class Output {
 public:
  explicit Output(const std::optional<std::filesystem::path>& path);
  std::ostream& stream();
  /// Flushes and reports write failures.
  void close();

 private:
  std::optional<std::filesystem::path> path_;
  std::unique_ptr<std::ofstream> file_;
};

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

/// Everything needed to rerun one invocation and verify its inputs.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // role -> path

  nlohmann::ordered_json to_json() const;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

/// On-disk memo of mining artifacts keyed by input digest and parameters.
class ArtifactCache {
 public:
  /// Disabled when `dir` is empty.
  explicit ArtifactCache(std::optional<std::filesystem::path> dir);

  std::optional<FrequentTagsetCollection> load_frequent(const std::string& key, const Dictionary& vocabulary) const;
  void store_frequent(const std::string& key, const FrequentTagsetCollection& f, const Dictionary& vocabulary) const;
  std::optional<CooccurrenceIndex> load_cooccurrence(const std::string& key, const Dictionary& vocabulary) const;
  void store_cooccurrence(const std::string& key, const CooccurrenceIndex& index,
                          const Dictionary& vocabulary) const;
  std::optional<CodeTable> load_code_table(const std::string& key, const Dictionary& vocabulary) const;
  void store_code_table(const std::string& key, const CodeTable& ct, const Dictionary& vocabulary) const;

  /// Digest over everything that determines an artifact.
  static std::string key(std::string_view kind, std::string_view corpus_digest, std::string_view params);

 private:
  std::optional<std::filesystem::path> path(const std::string& key, std::string_view ext) const;
  std::optional<std::filesystem::path> dir_;
};

std::string describe(const MiningParams& params);

}  // namespace tagrec::cli
