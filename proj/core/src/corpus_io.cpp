#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"
#include "stylefactor/corpus.hpp"
#include "stylefactor/error.hpp"

namespace stylefactor {
namespace {

using json = nlohmann::ordered_json;
using nlohmann::ordered_json;

[[noreturn]] void ParseFail(std::string_view source, std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kParse, std::string(source) + ":" + std::to_string(line) + ": " + what);
}

std::map<std::string, std::vector<std::string>> ReadVocabObject(const json& obj, std::string_view source,
                                                                std::size_t line) {
  if (!obj.is_object()) ParseFail(source, line, "vocabulary must be an object region -> [tokens]");
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [region, tokens] : obj.items()) {
    if (!tokens.is_array()) ParseFail(source, line, "vocabulary for '" + region + "' is not an array");
    auto& list = out[region];
    for (const auto& t : tokens) {
      if (!t.is_string()) ParseFail(source, line, "vocabulary token is not a string");
      list.push_back(t.get<std::string>());
    }
  }
  return out;
}

}  // namespace

Corpus ParseCorpus(std::istream& in, std::string_view source,
                   const std::map<std::string, std::vector<std::string>>* vocab) {
  CorpusBuilder builder;
  bool regions_fixed = false;
  bool vocab_fixed = false;
  std::map<std::string, std::vector<std::string>> header_vocab;
  std::set<std::string> ids;

  auto fix_vocab = [&](const std::map<std::string, std::vector<std::string>>& v) {
    for (const auto& [region, tokens] : v) {
      if (regions_fixed && !builder.peek().RegionIndex(region)) continue;
      builder.DeclareVocabulary(region, tokens);
    }
    vocab_fixed = true;
  };

  std::string text;
  std::size_t line_no = 0;
  bool first_record = true;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      ParseFail(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) ParseFail(source, line_no, "record is not a JSON object");

    if (rec.contains("_regions")) {
      if (!first_record) ParseFail(source, line_no, "region header must be the first record");
      const auto& regs = rec["_regions"];
      if (!regs.is_array()) ParseFail(source, line_no, "_regions must be an array of strings");
      for (const auto& r : regs) {
        if (!r.is_string() || r.get<std::string>().empty()) {
          ParseFail(source, line_no, "_regions entries must be non-empty strings");
        }
        if (builder.peek().RegionIndex(r.get<std::string>())) {
          ParseFail(source, line_no, "duplicate region '" + r.get<std::string>() + "' in header");
        }
        builder.AddRegion(r.get<std::string>());
      }
      regions_fixed = true;
      if (rec.contains("_vocab")) header_vocab = ReadVocabObject(rec["_vocab"], source, line_no);
      first_record = false;
      continue;
    }
    if (!vocab_fixed) {
      if (vocab) fix_vocab(*vocab);
      else if (!header_vocab.empty()) fix_vocab(header_vocab);
    }
    first_record = false;

    if (!rec.contains("id") || !rec["id"].is_string()) ParseFail(source, line_no, "missing string field 'id'");
    const auto id = rec["id"].get<std::string>();
    if (id.empty()) ParseFail(source, line_no, "empty document id");
    if (!ids.insert(id).second) {
      throw Error(ErrorKind::kValidation,
                  std::string(source) + ":" + std::to_string(line_no) + ": duplicate document id '" + id + "'");
    }
    if (!rec.contains("regions") || !rec["regions"].is_object()) {
      ParseFail(source, line_no, "missing object field 'regions'");
    }

    std::vector<std::pair<std::string, std::vector<std::string>>> regions;
    for (const auto& [region, tokens] : rec["regions"].items()) {
      if (regions_fixed && !builder.peek().RegionIndex(region)) {
        ParseFail(source, line_no, "token in undeclared region '" + region + "'");
      }
      if (region.empty()) ParseFail(source, line_no, "empty region name");
      if (!tokens.is_array()) ParseFail(source, line_no, "region '" + region + "' is not an array");
      std::vector<std::string> bag;
      bag.reserve(tokens.size());
      for (const auto& t : tokens) {
        if (!t.is_string()) ParseFail(source, line_no, "token in region '" + region + "' is not a string");
        auto tok = t.get<std::string>();
        if (tok.empty()) ParseFail(source, line_no, "empty token in region '" + region + "'");
        if (vocab_fixed) {
          const auto r = builder.peek().RegionIndex(region);
          if (!r || !builder.peek().vocabularies[*r].Find(tok)) {
            ParseFail(source, line_no, "token '" + tok + "' not in declared vocabulary of '" + region + "'");
          }
        }
        bag.push_back(std::move(tok));
      }
      regions.emplace_back(region, std::move(bag));
    }
    auto& doc = builder.AddDocument(id, regions);
    if (rec.contains("image_url") && rec["image_url"].is_string()) {
      doc.image_url = rec["image_url"].get<std::string>();
    }
    if (rec.contains("label")) {
      if (!rec["label"].is_string()) ParseFail(source, line_no, "'label' must be a string");
      builder.SetLabel(id, rec["label"].get<std::string>());
    }
  }
  if (!vocab_fixed) {
    if (vocab) fix_vocab(*vocab);
    else if (!header_vocab.empty()) fix_vocab(header_vocab);
  }

  Corpus corpus = std::move(builder).Build();
  RequireValid(corpus);
  return corpus;
}

Corpus LoadCorpus(const std::filesystem::path& path, const std::optional<std::filesystem::path>& vocab_path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open corpus file '" + path.string() + "'");
  if (vocab_path) {
    std::ifstream vin(*vocab_path);
    if (!vin) throw Error(ErrorKind::kIo, "cannot open vocabulary file '" + vocab_path->string() + "'");
    json v;
    try {
      v = json::parse(vin);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse, vocab_path->string() + ": " + e.what());
    }
    const auto vocab = ReadVocabObject(v, vocab_path->string(), 1);
    return ParseCorpus(in, path.string(), &vocab);
  }
  return ParseCorpus(in, path.string());
}

void WriteCorpus(const Corpus& corpus, std::ostream& out) {
  ordered_json header;
  header["_regions"] = corpus.regions;
  ordered_json vocab = ordered_json::object();
  for (std::size_t r = 0; r < corpus.regions.size(); ++r) {
    vocab[corpus.regions[r]] = corpus.vocabularies[r].tokens();
  }
  header["_vocab"] = std::move(vocab);
  out << header.dump() << '\n';

  for (const auto& doc : corpus.documents) {
    ordered_json rec;
    rec["id"] = doc.id;
    ordered_json regions = ordered_json::object();
    for (std::size_t r = 0; r < doc.tokens_by_region.size(); ++r) {
      if (doc.tokens_by_region[r].empty()) continue;
      auto& arr = regions[corpus.regions[r]] = ordered_json::array();
      for (TokenId w : doc.tokens_by_region[r]) arr.push_back(corpus.vocabularies[r].token(w));
    }
    rec["regions"] = std::move(regions);
    if (auto it = corpus.labels.find(doc.id); it != corpus.labels.end()) rec["label"] = it->second;
    if (doc.image_url) rec["image_url"] = *doc.image_url;
    out << rec.dump() << '\n';
  }
}

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write corpus file '" + path.string() + "'");
  WriteCorpus(corpus, out);
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace stylefactor
