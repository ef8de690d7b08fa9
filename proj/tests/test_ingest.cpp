#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "osir/ingest.hpp"
#include "osir/random.hpp"
#include "osir/record.hpp"

using namespace osir;

namespace {

// First record of the public 10% training file; attribute positions follow
// the published KDD'99 attribute list.
const char* kSampleLine =
    "0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,0.00,0.00,0.00,0.00,1.00,0.00,"
    "0.00,9,9,1.00,0.00,0.11,0.00,0.00,0.00,0.00,0.00,normal.";

ConnectionRecord make_record(const std::string& label, double duration, const std::string& proto) {
  ConnectionRecord rec;
  rec.num[0] = duration;
  rec.cat = {proto, "http", "SF"};
  rec.label = label;
  return rec;
}

ConnectionRecord random_record(Rng& rng) {
  ConnectionRecord rec;
  for (std::size_t a = 0; a < kNumAttributes; ++a) {
    if (is_categorical(a)) continue;
    if (kAttributes[a].kind == AttrKind::binary)
      rec.num[a] = static_cast<double>(uniform_below(rng, 2));
    else
      rec.num[a] = uniform_unit(rng) < 0.5 ? static_cast<double>(uniform_below(rng, 1000))
                                           : uniform_unit(rng) * 10.0;
  }
  const char* protos[] = {"tcp", "udp", "icmp"};
  const char* services[] = {"http", "smtp", "ftp_data"};
  const char* flags[] = {"SF", "REJ", "S0"};
  rec.cat = {protos[uniform_below(rng, 3)], services[uniform_below(rng, 3)],
             flags[uniform_below(rng, 3)]};
  const char* labels[] = {"normal", "smurf", "snmp_guess"};
  rec.label = labels[uniform_below(rng, 3)];
  return rec;
}

}  // namespace

TEST_CASE("parse_kdd_line reads the published attribute layout") {
  ConnectionRecord rec = parse_kdd_line(kSampleLine);
  CHECK(rec.num[0] == 0.0);           // duration
  CHECK(rec.token(1) == "tcp");       // protocol_type
  CHECK(rec.token(2) == "http");      // service
  CHECK(rec.token(3) == "SF");        // flag
  CHECK(rec.num[4] == 181.0);         // src_bytes
  CHECK(rec.num[5] == 5450.0);        // dst_bytes
  CHECK(rec.num[11] == 1.0);          // logged_in
  CHECK(rec.num[22] == 8.0);          // count
  CHECK(rec.num[28] == 1.0);          // same_srv_rate
  CHECK(rec.num[35] == 0.11);         // dst_host_same_src_port_rate
  CHECK(rec.label == "normal");       // trailing period stripped
}

TEST_CASE("parse_kdd_line rejects wrong field counts with the line number") {
  std::string no_label(kSampleLine);
  no_label.resize(no_label.rfind(','));  // 41 fields, label missing
  try {
    parse_kdd_line(no_label, 7);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("line 7") != std::string::npos);
    CHECK(msg.find("42") != std::string::npos);
  }
}

TEST_CASE("parse_kdd_line rejects non-numeric text in numeric positions") {
  std::string bad(kSampleLine);
  bad.replace(0, 1, "abc");  // duration
  CHECK_THROWS_AS(parse_kdd_line(bad, 1), Error);
  std::string bad_binary(kSampleLine);
  // land (attribute 7, index 6) must be 0/1
  CHECK_THROWS_AS(parse_kdd_line(
                      "0,tcp,http,SF,181,5450,2,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,0,0,0,0,1,0,"
                      "0,9,9,1,0,0.11,0,0,0,0,0,normal."),
                  Error);
}

TEST_CASE("parse_kdd_line keeps out-of-taxonomy labels verbatim") {
  std::string line(kSampleLine);
  line.replace(line.rfind("normal."), 7, "zergrush");
  ConnectionRecord rec = parse_kdd_line(line);
  CHECK(rec.label == "zergrush");
}

TEST_CASE("records round-trip through text form") {
  ConnectionRecord rec = parse_kdd_line(kSampleLine);
  std::string text = to_kdd_line(rec);
  CHECK(parse_kdd_line(text) == rec);
  // canonical form is a fixed point
  CHECK(to_kdd_line(parse_kdd_line(text)) == text);

  Rng rng(20250810);
  for (int i = 0; i < 200; ++i) {
    ConnectionRecord r = random_record(rng);
    CHECK(parse_kdd_line(to_kdd_line(r)) == r);
  }
}

TEST_CASE("deduplicate keeps first occurrences in order") {
  std::vector<ConnectionRecord> records = {
      make_record("normal", 1, "tcp"),
      make_record("smurf", 2, "udp"),
      make_record("normal", 1, "tcp"),   // dup of [0]
      make_record("normal", 1, "icmp"),  // differs in a feature
      make_record("smurf", 2, "udp"),    // dup of [1]
  };
  std::vector<ConnectionRecord> out = deduplicate(records);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == records[0]);
  CHECK(out[1] == records[1]);
  CHECK(out[2] == records[3]);

  SECTION("same features, different label are distinct records") {
    std::vector<ConnectionRecord> pair = {make_record("a", 5, "tcp"), make_record("b", 5, "tcp")};
    CHECK(deduplicate(pair).size() == 2);
  }
}

TEST_CASE("deduplicate is idempotent and identity on distinct input") {
  Rng rng(7);
  std::vector<ConnectionRecord> records;
  for (int i = 0; i < 100; ++i) records.push_back(random_record(rng));
  for (int i = 0; i < 40; ++i)
    records.push_back(records[uniform_below(rng, 100)]);  // inject duplicates

  std::vector<ConnectionRecord> once = deduplicate(records);
  std::vector<ConnectionRecord> twice = deduplicate(once);
  CHECK(once == twice);

  std::vector<ConnectionRecord> distinct;
  for (int i = 0; i < 20; ++i) distinct.push_back(make_record("c" + std::to_string(i), i, "tcp"));
  CHECK(deduplicate(distinct) == distinct);
}

TEST_CASE("codebooks sort tokens and map unseen tokens to the overflow index") {
  std::vector<ConnectionRecord> train = {
      make_record("normal", 0, "udp"),
      make_record("normal", 1, "tcp"),
      make_record("normal", 2, "icmp"),
      make_record("normal", 3, "tcp"),
  };
  Codebooks books = build_codebooks(train);
  CHECK(books[0].tokens == std::vector<std::string>{"icmp", "tcp", "udp"});
  CHECK(books[0].index_of("icmp") == 0);
  CHECK(books[0].index_of("tcp") == 1);
  CHECK(books[0].index_of("udp") == 2);
  CHECK(books[0].index_of("sctp") == 3);  // unseen -> overflow
  CHECK(books[0].overflow_index() == 3);

  SECTION("single observed token") {
    std::vector<ConnectionRecord> one = {make_record("normal", 0, "tcp")};
    Codebooks b = build_codebooks(one);
    CHECK(b[0].index_of("tcp") == 0);
    CHECK(b[0].overflow_index() == 1);
  }

  SECTION("codebooks are order-independent") {
    std::vector<ConnectionRecord> shuffled = {train[2], train[0], train[3], train[1]};
    Codebooks b = build_codebooks(shuffled);
    CHECK(b[0].tokens == books[0].tokens);
    CHECK(b[1].tokens == books[1].tokens);
    CHECK(b[2].tokens == books[2].tokens);
  }
}

TEST_CASE("encode replaces tokens with indices and passes numerics through") {
  std::vector<ConnectionRecord> train = {
      make_record("normal", 0, "udp"),
      make_record("normal", 1, "tcp"),
      make_record("normal", 2, "icmp"),
  };
  Codebooks books = build_codebooks(train);

  ConnectionRecord rec = make_record("normal", 181, "tcp");
  std::array<double, kNumAttributes> v = encode(rec, books);
  CHECK(v[0] == 181.0);  // numeric pass-through
  CHECK(v[1] == 1.0);    // tcp
  CHECK(v[2] == books[1].index_of("http"));
  CHECK(v[3] == books[2].index_of("SF"));

  ConnectionRecord unseen = make_record("normal", 1, "sctp");
  CHECK(encode(unseen, books)[1] == 3.0);  // overflow index
}

TEST_CASE("build_label_space splits known and unknown classes") {
  Taxonomy tax = default_taxonomy();
  std::vector<std::string> train = {"normal", "smurf", "normal"};
  std::vector<std::string> test = {"normal", "smurf", "snmp_guess"};
  LabelSpace space = build_label_space(train, test, tax);
  CHECK(space.known_classes == std::vector<std::string>{"normal", "smurf"});
  CHECK(space.unknown_classes == std::vector<std::string>{"snmp_guess"});
  CHECK(space.class_index("normal") == 0);
  CHECK(space.class_index("smurf") == 1);
  CHECK(!space.class_index("snmp_guess"));
  CHECK(space.is_unknown("snmp_guess"));
  CHECK(space.metatype_map.at("smurf") == "DoS");
  CHECK(space.metatype_map.at("snmp_guess") == "unlisted");

  SECTION("identical train and test labels leave unknown empty") {
    LabelSpace s = build_label_space(train, train, tax);
    CHECK(s.unknown_classes.empty());
  }

  SECTION("labels dropped by the rare-class filter count as unknown") {
    // post-filter train no longer contains "spy"; test still does
    std::vector<std::string> filtered_train = {"normal", "smurf"};
    std::vector<std::string> t = {"normal", "spy"};
    LabelSpace s = build_label_space(filtered_train, t, tax);
    CHECK(s.unknown_classes == std::vector<std::string>{"spy"});
  }

  SECTION("empty training label set is an error") {
    CHECK_THROWS_AS(build_label_space({}, test, tax), Error);
  }

  SECTION("known and unknown cover every test label and stay disjoint") {
    Rng rng(11);
    for (int round = 0; round < 50; ++round) {
      std::vector<std::string> tr, te;
      for (int i = 0; i < 10; ++i) tr.push_back("c" + std::to_string(uniform_below(rng, 8)));
      for (int i = 0; i < 10; ++i) te.push_back("c" + std::to_string(uniform_below(rng, 12)));
      LabelSpace s = build_label_space(tr, te, tax);
      for (const std::string& label : te)
        CHECK((s.class_index(label).has_value() ^ s.is_unknown(label)));
      for (const std::string& u : s.unknown_classes) CHECK(!s.class_index(u).has_value());
    }
  }
}

TEST_CASE("taxonomy file parses and matches the built-in table") {
  Taxonomy from_file = load_taxonomy(OSIR_TAXONOMY_FILE);
  Taxonomy builtin = default_taxonomy();
  CHECK(from_file.metatype == builtin.metatype);
  CHECK(from_file.metatype_of("smurf") == "DoS");
  CHECK(from_file.metatype_of("xterm") == "U2R");
  CHECK(from_file.metatype_of("zergrush") == "unlisted");
}

TEST_CASE("taxonomy parser handles comments and rejects malformed lines") {
  std::istringstream good("# comment\n\nfoo DoS\nbar Probe # trailing\n");
  Taxonomy tax = parse_taxonomy(good);
  CHECK(tax.metatype_of("foo") == "DoS");
  CHECK(tax.metatype_of("bar") == "Probe");

  std::istringstream bad("justoneword\n");
  CHECK_THROWS_AS(parse_taxonomy(bad), Error);
}
