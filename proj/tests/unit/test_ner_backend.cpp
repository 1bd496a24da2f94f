#include <doctest.h>

#include <fstream>

#include "ndv/common/error.hpp"
#include "ndv/nermask/backend.hpp"
#include "ndv/nermask/bio.hpp"

using namespace ndv;
using namespace ndv::ner;
using nlohmann::json;

namespace {

std::vector<std::string> tag_strings(const std::vector<TokenAnnotation>& t) {
  std::vector<std::string> out;
  for (const auto& a : t) out.push_back(a.tag.str());
  return out;
}

std::vector<std::string> token_strings(const std::vector<TokenAnnotation>& t) {
  std::vector<std::string> out;
  for (const auto& a : t) out.push_back(a.token);
  return out;
}

// Returns a canned reply regardless of input.
class CannedBackend final : public NerBackend {
 public:
  explicit CannedBackend(AnnotationBatch reply) : reply_(std::move(reply)) {}
  AnnotationBatch annotate(std::span<const std::string>) const override { return reply_; }
  std::string describe() const override { return "canned"; }

 private:
  AnnotationBatch reply_;
};

}  // namespace

TEST_CASE("stub tags a capitalized run as one entity") {
  const StubNerBackend stub;
  const auto t = stub.tag("John Smith spoke");
  CHECK(token_strings(t) == std::vector<std::string>{"John", "Smith", "spoke"});
  CHECK(tag_strings(t) == std::vector<std::string>{"B-PER", "I-PER", "O"});
}

TEST_CASE("stub drops an unknown sentence-initial capital") {
  const StubNerBackend stub;
  auto t = stub.tag("The mayor met Ben Walsh in Paris.");
  CHECK(tag_strings(t) ==
        std::vector<std::string>{"O", "O", "O", "B-PER", "I-PER", "O", "B-LOC", "O"});
  t = stub.tag("Rain fell. Yesterday Congress adjourned.");
  // "Yesterday" opens the second sentence and is not in the gazetteer, but
  // the run continues with "Congress".
  CHECK(tag_strings(t) ==
        std::vector<std::string>{"O", "O", "O", "O", "B-ORG", "O", "O"});
}

TEST_CASE("stub class comes from the last gazetteer hit") {
  const StubNerBackend stub;
  auto t = stub.tag("he visited New York City today");
  CHECK(tag_strings(t) == std::vector<std::string>{"O", "O", "B-LOC", "I-LOC", "I-LOC", "O"});
  t = stub.tag("the Acme Widget Works closed");
  CHECK(tag_strings(t) == std::vector<std::string>{"O", "B-MISC", "I-MISC", "I-MISC", "O"});
  t = stub.tag("met Lincoln's aides");
  CHECK(token_strings(t) == std::vector<std::string>{"met", "Lincoln's", "aides"});
  CHECK(tag_strings(t) == std::vector<std::string>{"O", "B-PER", "O"});
}

TEST_CASE("stub offsets are scalar positions") {
  const StubNerBackend stub;
  const std::string text = "café in Paris";
  const auto t = stub.tag(text);
  REQUIRE(t.size() == 3);
  CHECK(t[0].start == 0);
  CHECK(t[0].end == 4);
  CHECK(t[2].start == 8);
  CHECK(t[2].end == 13);
  CHECK_NOTHROW(validate_annotations(text, t));
}

TEST_CASE("stub golden file") {
  std::ifstream in(std::string(NDV_TEST_DATA) + "/stub_ner_golden.jsonl");
  REQUIRE(in);
  const StubNerBackend stub;
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const json row = json::parse(line);
    const auto t = stub.tag(row.at("text").get<std::string>());
    CAPTURE(line);
    CHECK(token_strings(t) == row.at("tokens").get<std::vector<std::string>>());
    CHECK(tag_strings(t) == row.at("tags").get<std::vector<std::string>>());
    ++rows;
  }
  CHECK(rows >= 10);
}

TEST_CASE("annotate checks backend replies") {
  const StubNerBackend stub;
  CHECK(annotate(stub, {}).empty());

  const std::vector<std::string> texts = {"John Smith spoke", "in Paris"};
  const auto out = annotate(stub, texts);
  REQUIRE(out.size() == 2);
  CHECK(decode_bio(out[1]).size() == 1);

  CannedBackend short_reply(AnnotationBatch(1));
  CHECK_THROWS_AS(annotate(short_reply, texts), ProtocolError);

  CannedBackend past_end({{{"x", 0, 99, BioTag::outside()}}});
  CHECK_THROWS_AS(annotate(past_end, std::vector<std::string>{"short"}), ProtocolError);

  CannedBackend overlapping({{{"ab", 0, 2, BioTag::outside()}, {"b", 1, 2, BioTag::outside()}}});
  CHECK_THROWS_AS(annotate(overlapping, std::vector<std::string>{"abc"}), ProtocolError);
}

TEST_CASE("annotation wire format") {
  const AnnotationBatch batch = {{{"John", 0, 4, BioTag::begin(EntityClass::PER)}}, {}};
  const json j = annotations_to_json(batch);
  CHECK(j.at("annotations").size() == 2);
  CHECK(j["annotations"][0][0]["tag"] == "B-PER");
  CHECK(annotations_from_json(j) == batch);
  CHECK_THROWS_AS(annotations_from_json(json{{"nope", 1}}), ProtocolError);
  json bad = j;
  bad["annotations"][0][0]["tag"] = "B-DATE";
  CHECK_THROWS_AS(annotations_from_json(bad), ProtocolError);
}

TEST_CASE("backend factory") {
  CHECK(make_ner_backend("stub")->describe() == "stub");
  CHECK(make_ner_backend("http://127.0.0.1:9/ner")->describe().find("127.0.0.1") !=
        std::string::npos);
  CHECK_THROWS_AS(make_ner_backend("ftp://x"), Error);
}
