#include <doctest.h>

#include <sstream>

#include "olfalign/core_data.hpp"
#include "olfalign/error.hpp"
#include "support.hpp"

using namespace olfalign;

namespace {

std::string embedding_csv(int rows, int dim, int short_row = -1) {
  std::ostringstream out;
  out << "id";
  for (int j = 0; j < dim; ++j) out << ",f" << j;
  out << "\n";
  for (int i = 0; i < rows; ++i) {
    out << "m" << i;
    const int cols = i == short_row ? dim - 1 : dim;
    for (int j = 0; j < cols; ++j) out << "," << (i + 1) * 0.001 * (j + 1);
    out << "\n";
  }
  return out.str();
}

std::string manifest(int dim, const std::string& layer = "\"final\"") {
  return "{\"model_name\": \"toy\", \"layer\": " + layer + ", \"dim\": " + std::to_string(dim) + "}";
}

EmbeddingTable unit_table() {
  Eigen::MatrixXd m(4, 2);
  m << 1, 0, 0, 1, 1, 1, 3, -2;
  return EmbeddingTable({MoleculeId("m1"), MoleculeId("m2"), MoleculeId("m3"), MoleculeId("m4")}, m, "toy",
                        Layer::final_layer());
}

}  // namespace

TEST_CASE("parse_odorant_key") {
  const auto single = parse_odorant_key("325");
  CHECK(single.size() == 1);
  CHECK(single.components()[0].str() == "325");
  CHECK_FALSE(single.is_mixture());

  const auto mixture = parse_odorant_key("126;520296;7122;6050;5273467;5364231");
  REQUIRE(mixture.size() == 6);
  CHECK(mixture.components()[5].str() == "5364231");
  CHECK(mixture.key() == "126;520296;7122;6050;5273467;5364231");

  CHECK(parse_odorant_key(" a ; b ").key() == "a;b");
  CHECK_THROWS_AS(parse_odorant_key(";;325"), SchemaError);
  CHECK_THROWS_AS(parse_odorant_key(""), SchemaError);
  CHECK_THROWS_AS(MoleculeId(""), SchemaError);
  CHECK_THROWS_AS(MoleculeId("a;b"), SchemaError);
}

TEST_CASE("layer ordering and parsing") {
  CHECK(Layer::at(0) < Layer::at(1));
  CHECK(Layer::at(11) < Layer::final_layer());
  CHECK(Layer::parse("final").is_final());
  CHECK(Layer::parse("3") == Layer::at(3));
  CHECK(Layer::at(7).to_string() == "7");
  CHECK_THROWS_AS(Layer::parse("-1"), SchemaError);
  CHECK_THROWS_AS(Layer::parse("last"), SchemaError);
}

TEST_CASE("load_embedding_table shape checks") {
  fixture::TempDir dir;
  const auto man = dir.write("m.json", manifest(768));
  SUBCASE("3 rows at D=768") {
    const auto csv = dir.write("e.csv", embedding_csv(3, 768));
    const auto table = load_embedding_table(csv, man);
    CHECK(table.rows() == 3);
    CHECK(table.dim() == 768);
    CHECK(table.model_name() == "toy");
    CHECK(table.layer().is_final());
  }
  SUBCASE("row with 767 values") {
    const auto csv = dir.write("e.csv", embedding_csv(3, 768, 1));
    CHECK_THROWS_AS(load_embedding_table(csv, man), IngestionError);
  }
  SUBCASE("header narrower than manifest") {
    const auto csv = dir.write("e.csv", embedding_csv(3, 767));
    CHECK_THROWS_AS(load_embedding_table(csv, man), IngestionError);
  }
  SUBCASE("duplicate id and non-finite value") {
    const auto man2 = dir.write("m2.json", manifest(2));
    CHECK_THROWS_AS(load_embedding_table(dir.write("d.csv", "id,f0,f1\na,1,2\na,3,4\n"), man2), IngestionError);
    CHECK_THROWS_AS(load_embedding_table(dir.write("n.csv", "id,f0,f1\na,1,nan\n"), man2), IngestionError);
    CHECK_THROWS_AS(load_embedding_table(dir.write("x.csv", "id,f0,f1\na,1,abc\n"), man2), IngestionError);
  }
  SUBCASE("error names the row") {
    const auto csv = dir.write("e.csv", embedding_csv(3, 768, 2));
    try {
      load_embedding_table(csv, man);
      FAIL("expected IngestionError");
    } catch (const IngestionError& e) {
      CHECK(std::string(e.what()).find(":4") != std::string::npos);
    }
  }
  SUBCASE("loaded twice is identical") {
    const auto csv = dir.write("e.csv", embedding_csv(5, 768));
    const auto a = load_embedding_table(csv, man);
    const auto b = load_embedding_table(csv, man);
    CHECK(a.ids() == b.ids());
    CHECK(std::memcmp(a.matrix().data(), b.matrix().data(), sizeof(double) * a.matrix().size()) == 0);
  }
}

TEST_CASE("embedding table round trip") {
  fixture::TempDir dir;
  const Eigen::MatrixXd values = fixture::gaussian(6, 4, 11) * 1e3;
  std::vector<MoleculeId> ids;
  for (int i = 0; i < 6; ++i) ids.emplace_back("CID" + std::to_string(100 + i));
  const EmbeddingTable original(ids, values, "model-x", Layer::at(4));
  write_embedding_table(original, dir / "t.csv", dir / "t.json");
  const auto loaded = load_embedding_table(dir / "t.csv", dir / "t.json");
  CHECK(loaded.ids() == original.ids());
  CHECK(loaded.model_name() == "model-x");
  CHECK(loaded.layer() == Layer::at(4));
  CHECK((loaded.matrix().array() == original.matrix().array()).all());

  write_embedding_table(loaded, dir / "u.csv", dir / "u.json");
  CHECK(fixture::read(dir / "t.csv") == fixture::read(dir / "u.csv"));
}

TEST_CASE("load_perceptual") {
  fixture::TempDir dir;
  SUBCASE("labels") {
    const auto p = dir.write("l.csv", "odorant,fruity,green\nm1,1,0\nm2;m3,0,1\n");
    const auto labels = load_labels(p);
    CHECK(labels.rows() == 2);
    CHECK(labels.descriptors() == std::vector<std::string>{"fruity", "green"});
    CHECK(labels.odorants()[1].is_mixture());
    CHECK(std::holds_alternative<BinaryLabelSet>(load_perceptual(p, PerceptualKind::labels)));
  }
  SUBCASE("label value 2 rejected") {
    CHECK_THROWS_AS(load_labels(dir.write("l.csv", "odorant,a\nm1,2\n")), SchemaError);
  }
  SUBCASE("ratings range from sidecar") {
    const auto p = dir.write("r.csv", "odorant,a,b\nm1,-1,0.5\nm2,1,0\n");
    dir.write("r.json", "{\"range\": [-1, 1]}");
    const auto ratings = load_ratings(p);
    CHECK(ratings.range().lo == -1.0);
    CHECK(ratings.range().hi == 1.0);
    CHECK(ratings.ratings()(0, 1) == 0.5);
    dir.write("r.json", "{\"range\": [0, 1]}");
    CHECK_THROWS_AS(load_ratings(p), SchemaError);
  }
  SUBCASE("pairs") {
    const auto p = dir.write("p.csv", "odorant_a,odorant_b,score\nm1,m2,0.5\nm1;m2,m3,0.25\n");
    dir.write("p.json", "{\"range\": [0, 1], \"polarity\": \"distance\"}");
    const auto pairs = load_pairs(p);
    CHECK(pairs.size() == 2);
    CHECK(pairs.polarity() == Polarity::distance);
    CHECK(pairs.similarity_oriented_scores() == std::vector<double>{-0.5, -0.25});
  }
  SUBCASE("duplicate unordered pair rejected") {
    const auto p = dir.write("p.csv", "odorant_a,odorant_b,score\nm1,m2,0.5\nm2,m1,0.25\n");
    dir.write("p.json", "{\"range\": [0, 1], \"polarity\": \"similarity\"}");
    CHECK_THROWS_AS(load_pairs(p), SchemaError);
  }
  SUBCASE("per-subject with missing cells") {
    const auto p = dir.write("s.csv", "subject,odorant,a\ns1,m1,1\ns1,m2,\ns2,m1,2\ns2,m2,3\n");
    const auto data = load_per_subject(p);
    CHECK(data.subjects().size() == 2);
    CHECK(std::isnan(data.subject(0)(1, 0)));
    CHECK(data.subject(1)(1, 0) == 3.0);
  }
}

TEST_CASE("mixture_embedding") {
  const auto table = unit_table();
  const Eigen::VectorXd m1 = table.matrix().row(0).transpose();
  CHECK((mixture_embedding(table, parse_odorant_key("m1")).array() == m1.array()).all());
  CHECK((mixture_embedding(table, parse_odorant_key("m1;m1")).array() == m1.array()).all());
  CHECK((mixture_embedding(table, parse_odorant_key("m4;m4;m4")).array() ==
         table.matrix().row(3).transpose().array())
            .all());

  const auto half = mixture_embedding(table, parse_odorant_key("m1;m2"));
  CHECK(half(0) == 0.5);
  CHECK(half(1) == 0.5);

  CHECK_THROWS_AS(mixture_embedding(table, parse_odorant_key("m1;zz")), LookupError);
  CHECK_FALSE(resolvable(table, parse_odorant_key("m1;zz")));
}

TEST_CASE("mixture_embedding is permutation invariant") {
  std::vector<MoleculeId> ids;
  for (int i = 0; i < 8; ++i) ids.emplace_back("x" + std::to_string(i));
  const EmbeddingTable table(ids, fixture::gaussian(8, 16, 3), "toy", Layer::final_layer());
  std::vector<std::string> keys{"x3", "x0", "x7", "x5", "x0"};
  const auto join_keys = [](const std::vector<std::string>& k) {
    std::string s;
    for (const auto& t : k) s += (s.empty() ? "" : ";") + t;
    return s;
  };
  const Eigen::VectorXd ref = mixture_embedding(table, parse_odorant_key(join_keys(keys)));
  std::sort(keys.begin(), keys.end());
  do {
    const Eigen::VectorXd v = mixture_embedding(table, parse_odorant_key(join_keys(keys)));
    REQUIRE((v.array() == ref.array()).all());
  } while (std::next_permutation(keys.begin(), keys.end()));
}

TEST_CASE("join") {
  const auto table = unit_table();
  SUBCASE("full coverage") {
    const BinaryLabelSet labels({parse_odorant_key("m3"), parse_odorant_key("m1;m2"), parse_odorant_key("m4")}, {"a"},
                                Eigen::MatrixXd::Ones(3, 1));
    const auto bundle = join(table, labels, "ds");
    CHECK(bundle.dropped() == 0);
    CHECK(bundle.size() == 3);
    CHECK(bundle.row_keys() == std::vector<std::string>{"m3", "m1;m2", "m4"});
    CHECK(bundle.features()(1, 0) == 0.5);
    CHECK(bundle.provenance().dataset == "ds");
  }
  SUBCASE("missing mixture component drops that pair") {
    const SimilarityJudgmentSet pairs({{parse_odorant_key("m1"), parse_odorant_key("m2")},
                                       {parse_odorant_key("m1;zz"), parse_odorant_key("m3")},
                                       {parse_odorant_key("m3"), parse_odorant_key("m4")}},
                                      {0.1, 0.2, 0.3}, {0, 1}, Polarity::similarity);
    const auto bundle = join(table, pairs);
    CHECK(bundle.dropped() == 1);
    CHECK(bundle.size() == 2);
    CHECK(bundle.source_rows() == std::vector<Index>{0, 2});
    const auto [a, b] = bundle.pair_embeddings(1);
    CHECK(a(0) == 1.0);
    CHECK(b(0) == 3.0);
  }
  SUBCASE("missing row dropped, order kept") {
    Eigen::MatrixXd r(3, 1);
    r << 0.1, 0.2, 0.3;
    const RatingSet ratings({parse_odorant_key("m2"), parse_odorant_key("nope"), parse_odorant_key("m1")}, {"a"}, r,
                            {0, 1});
    const auto bundle = join(table, ratings);
    CHECK(bundle.dropped() == 1);
    CHECK(bundle.row_keys() == std::vector<std::string>{"m2", "m1"});
    const auto& kept = std::get<RatingSet>(bundle.perceptual());
    CHECK(kept.ratings()(1, 0) == 0.3);
    CHECK(bundle.features().rows() == kept.rows());
  }
  SUBCASE("disjoint ids") {
    const BinaryLabelSet labels({parse_odorant_key("q1")}, {"a"}, Eigen::MatrixXd::Ones(1, 1));
    CHECK_THROWS_AS(join(table, labels), JoinError);
  }
}
