#include "stylefactor/corpus.hpp"

#include <numeric>
#include <set>
#include <sstream>

#include "stylefactor/error.hpp"
#include "stylefactor/rng.hpp"

namespace stylefactor {

TokenId Vocabulary::Add(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

std::optional<TokenId> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t OutfitDocument::TotalTokens() const {
  std::size_t n = 0;
  for (const auto& bag : tokens_by_region) n += bag.size();
  return n;
}

std::size_t Corpus::TotalTokens() const {
  return std::accumulate(documents.begin(), documents.end(), std::size_t{0},
                         [](std::size_t acc, const OutfitDocument& d) { return acc + d.TotalTokens(); });
}

std::optional<std::size_t> Corpus::RegionIndex(std::string_view name) const {
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (regions[r] == name) return r;
  }
  return std::nullopt;
}

const OutfitDocument* Corpus::FindDocument(std::string_view id) const {
  for (const auto& doc : documents) {
    if (doc.id == id) return &doc;
  }
  return nullptr;
}

std::map<std::string, std::vector<std::string>> Corpus::TokenStrings(
    const OutfitDocument& doc) const {
  std::map<std::string, std::vector<std::string>> out;
  for (std::size_t r = 0; r < doc.tokens_by_region.size() && r < regions.size(); ++r) {
    auto& bag = out[regions[r]];
    for (TokenId w : doc.tokens_by_region[r]) bag.push_back(vocabularies[r].token(w));
  }
  return out;
}

std::vector<Violation> Validate(const Corpus& corpus) {
  std::vector<Violation> out;
  std::set<std::string> region_names;
  for (const auto& name : corpus.regions) {
    if (name.empty()) out.push_back({"", "", "empty region name"});
    if (!region_names.insert(name).second) out.push_back({"", name, "duplicate region name"});
  }
  if (corpus.vocabularies.size() != corpus.regions.size()) {
    out.push_back({"", "", "vocabulary count does not match region count"});
  }
  const std::size_t nvocab = std::min(corpus.vocabularies.size(), corpus.regions.size());
  for (std::size_t r = 0; r < nvocab; ++r) {
    const auto& vocab = corpus.vocabularies[r];
    if (vocab.region() != corpus.regions[r]) {
      out.push_back({"", corpus.regions[r], "vocabulary is tagged with region '" + vocab.region() + "'"});
    }
    std::set<std::string_view> seen;
    for (const auto& tok : vocab.tokens()) {
      if (tok.empty()) out.push_back({"", corpus.regions[r], "empty token in vocabulary"});
      if (!seen.insert(tok).second) {
        out.push_back({"", corpus.regions[r], "duplicate vocabulary token '" + tok + "'"});
      }
    }
  }

  std::set<std::string_view> ids;
  for (const auto& doc : corpus.documents) {
    if (doc.id.empty()) out.push_back({"", "", "document with empty id"});
    if (!ids.insert(doc.id).second) out.push_back({doc.id, "", "duplicate document id"});
    if (doc.tokens_by_region.size() != corpus.regions.size()) {
      out.push_back({doc.id, "", "document references " + std::to_string(doc.tokens_by_region.size()) +
                                     " regions, corpus declares " +
                                     std::to_string(corpus.regions.size())});
    }
    const std::size_t nr = std::min(doc.tokens_by_region.size(), nvocab);
    for (std::size_t r = 0; r < nr; ++r) {
      const auto v = corpus.vocabularies[r].size();
      for (TokenId w : doc.tokens_by_region[r]) {
        if (w >= v) {
          out.push_back({doc.id, corpus.regions[r],
                         "token id " + std::to_string(w) + " out of range (V=" + std::to_string(v) + ")"});
          break;
        }
      }
    }
    if (doc.TotalTokens() == 0) out.push_back({doc.id, "", "document has no tokens"});
  }
  for (const auto& [id, label] : corpus.labels) {
    if (!ids.contains(id)) out.push_back({id, "", "label for unknown document"});
  }
  return out;
}

void RequireValid(const Corpus& corpus) {
  const auto violations = Validate(corpus);
  if (violations.empty()) return;
  std::ostringstream os;
  os << violations.size() << " corpus violation(s):";
  for (std::size_t i = 0; i < violations.size() && i < 5; ++i) {
    const auto& v = violations[i];
    os << " [";
    if (!v.document.empty()) os << "doc '" << v.document << "' ";
    if (!v.region.empty()) os << "region '" << v.region << "' ";
    os << v.message << "]";
  }
  throw Error(ErrorKind::kValidation, os.str());
}

CorpusBuilder::CorpusBuilder(std::vector<std::string> regions) {
  for (auto& r : regions) AddRegion(r);
}

std::size_t CorpusBuilder::AddRegion(std::string_view name) {
  if (auto idx = corpus_.RegionIndex(name)) return *idx;
  corpus_.regions.emplace_back(name);
  corpus_.vocabularies.emplace_back(std::string(name));
  for (auto& doc : corpus_.documents) doc.tokens_by_region.emplace_back();
  return corpus_.regions.size() - 1;
}

OutfitDocument& CorpusBuilder::AddDocument(
    std::string id, const std::vector<std::pair<std::string, std::vector<std::string>>>& regions) {
  OutfitDocument doc;
  doc.id = std::move(id);
  for (const auto& [region, tokens] : regions) {
    const std::size_t r = AddRegion(region);
    doc.tokens_by_region.resize(corpus_.regions.size());
    for (const auto& tok : tokens) doc.tokens_by_region[r].push_back(corpus_.vocabularies[r].Add(tok));
  }
  doc.tokens_by_region.resize(corpus_.regions.size());
  corpus_.documents.push_back(std::move(doc));
  return corpus_.documents.back();
}

void CorpusBuilder::SetLabel(const std::string& id, std::string label) {
  corpus_.labels[id] = std::move(label);
}

void CorpusBuilder::DeclareVocabulary(std::string_view region, const std::vector<std::string>& tokens) {
  const std::size_t r = AddRegion(region);
  for (const auto& tok : tokens) corpus_.vocabularies[r].Add(tok);
}

Corpus CorpusBuilder::Build() && { return std::move(corpus_); }

Corpus FlattenToMono(const Corpus& corpus, bool prefix_regions) {
  RequireValid(corpus);
  Corpus out;
  out.regions = {"global"};
  out.vocabularies = {Vocabulary("global")};
  out.labels = corpus.labels;
  auto& vocab = out.vocabularies.front();
  out.documents.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    OutfitDocument flat;
    flat.id = doc.id;
    flat.image_url = doc.image_url;
    flat.tokens_by_region.resize(1);
    auto& bag = flat.tokens_by_region.front();
    bag.reserve(doc.TotalTokens());
    for (std::size_t r = 0; r < doc.tokens_by_region.size(); ++r) {
      for (TokenId w : doc.tokens_by_region[r]) {
        const auto& tok = corpus.vocabularies[r].token(w);
        bag.push_back(prefix_regions ? vocab.Add(corpus.regions[r] + "/" + tok) : vocab.Add(tok));
      }
    }
    out.documents.push_back(std::move(flat));
  }
  return out;
}

Corpus StripLabels(Corpus corpus) {
  corpus.labels.clear();
  return corpus;
}

std::string CorpusDigest(const Corpus& corpus) {
  std::uint64_t h = Fnv1a64("corpus-v1");
  auto mix = [&h](std::string_view s) {
    h = Fnv1a64(s, h);
    h = Fnv1a64(std::string_view("\x1f", 1), h);
  };
  for (std::size_t r = 0; r < corpus.regions.size(); ++r) {
    mix(corpus.regions[r]);
    for (const auto& tok : corpus.vocabularies.at(r).tokens()) mix(tok);
  }
  for (const auto& doc : corpus.documents) {
    mix(doc.id);
    for (const auto& bag : doc.tokens_by_region) {
      std::string buf;
      for (TokenId w : bag) buf += std::to_string(w) + ",";
      mix(buf);
    }
  }
  return HexDigest(h);
}

}  // namespace stylefactor
