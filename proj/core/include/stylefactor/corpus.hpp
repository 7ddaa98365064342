#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stylefactor {

using TokenId = std::uint32_t;

/// Bijection between a region's attribute strings and ids 0..V-1.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::string region) : region_(std::move(region)) {}

  /// Returns the id of `token`, appending it if unseen.
  TokenId Add(std::string_view token);
  std::optional<TokenId> Find(std::string_view token) const;

  const std::string& region() const { return region_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.region_ == b.region_ && a.tokens_ == b.tokens_;
  }

 private:
  std::string region_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// One outfit: a tuple of per-region token bags. `tokens_by_region` is
/// indexed like `Corpus::regions`; a region may be empty for a document.
struct OutfitDocument {
  std::string id;
  std::vector<std::vector<TokenId>> tokens_by_region;
  std::optional<std::string> image_url;

  std::size_t TotalTokens() const;

  friend bool operator==(const OutfitDocument&, const OutfitDocument&) = default;
};

/// Region-aware bag-of-attribute corpus. Labels are evaluation-only
/// metadata; the sampler never reads them.
struct Corpus {
  std::vector<std::string> regions;
  std::vector<Vocabulary> vocabularies;
  std::vector<OutfitDocument> documents;
  std::map<std::string, std::string> labels;

  std::size_t num_regions() const { return regions.size(); }
  std::size_t num_documents() const { return documents.size(); }
  std::size_t TotalTokens() const;
  std::optional<std::size_t> RegionIndex(std::string_view name) const;
  /// Linear lookup; callers needing many lookups should build their own index.
  const OutfitDocument* FindDocument(std::string_view id) const;
  /// Token strings of one document grouped by region name.
  std::map<std::string, std::vector<std::string>> TokenStrings(const OutfitDocument& doc) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct Violation {
  std::string document;  // empty for corpus-level problems
  std::string region;    // empty when not region-specific
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every corpus invariant without mutating. Empty result means valid.
std::vector<Violation> Validate(const Corpus& corpus);

/// Throws Error(kValidation) carrying the first violations if any exist.
void RequireValid(const Corpus& corpus);

/// Incremental construction from token strings; vocabularies grow as tokens
/// are seen. Regions are fixed up front or appended in first-seen order.
class CorpusBuilder {
 public:
  CorpusBuilder() = default;
  explicit CorpusBuilder(std::vector<std::string> regions);

  std::size_t AddRegion(std::string_view name);
  OutfitDocument& AddDocument(
      std::string id, const std::vector<std::pair<std::string, std::vector<std::string>>>& regions);
  void SetLabel(const std::string& id, std::string label);
  /// Pre-populates a region's vocabulary so ids follow the given order.
  void DeclareVocabulary(std::string_view region, const std::vector<std::string>& tokens);

  Corpus Build() &&;
  const Corpus& peek() const { return corpus_; }

 private:
  Corpus corpus_;
};

/// Parses the JSON-lines corpus format. `source` names the input in errors.
Corpus ParseCorpus(std::istream& in, std::string_view source = "<stream>",
                   const std::map<std::string, std::vector<std::string>>* vocab = nullptr);

/// Loads and validates a corpus file; `vocab_path` optionally fixes the
/// per-region vocabularies (a JSON object region -> token list).
Corpus LoadCorpus(const std::filesystem::path& path,
                  const std::optional<std::filesystem::path>& vocab_path = std::nullopt);

void WriteCorpus(const Corpus& corpus, std::ostream& out);
void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path);

/// Single-region ("global") view. With `prefix_regions` every token becomes
/// "region/token"; otherwise identical strings from different regions merge.
Corpus FlattenToMono(const Corpus& corpus, bool prefix_regions);

/// Copy of `corpus` with labels removed.
Corpus StripLabels(Corpus corpus);

/// Content hash over regions, vocabularies and documents (labels excluded).
std::string CorpusDigest(const Corpus& corpus);

}  // namespace stylefactor
