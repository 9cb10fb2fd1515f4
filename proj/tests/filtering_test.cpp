#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "skyaug/error.hpp"
#include "skyaug/filtering.hpp"
#include "support.hpp"

using namespace skyaug;

namespace {

// The pipeline's default synthetic fixture: 115 images at side 32.
class FilterFixture : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    split_ = new fixtures::SplitItems(fixtures::synthetic_split(115, 32, 3, 7));
    train_ = new Dataset(make_dataset(split_->train));
    val_ = new Dataset(make_dataset(split_->val));
  }
  static void TearDownTestSuite() {
    delete split_;
    delete train_;
    delete val_;
  }

  void SetUp() override {
    cfg_.n_comp = 20;
    std::size_t id = 0;
    for (const auto& it : synth_dataset(3, 32, 99))
      cands_.push_back({it.image, estimate_map(it.image, {}, {}), {"", 0, id++}});
    for (std::size_t k = 0; k < 3; ++k) {
      duplicate_ids_.push_back(id);
      cands_.push_back({split_->train[k * 5].image, split_->train[k * 5].map, {"", 0, id++}});
    }
    std::mt19937_64 rng(8);
    noise_id_ = id;
    cands_.push_back(adversarial(rng, id++));
  }

  // Uniform noise with the brightness rule inverted: dark pixels marked cloud.
  static Candidate adversarial(std::mt19937_64& rng, std::size_t id) {
    Candidate c{fixtures::random_image(32, 32, rng), BinaryMap(32, 32), {"", 0, id}};
    for (std::size_t i = 0; i < c.image.size(); ++i)
      c.map[i] = c.image[i] < 128 ? 1 : 0;
    return c;
  }

  static inline fixtures::SplitItems* split_ = nullptr;
  static inline Dataset* train_ = nullptr;
  static inline Dataset* val_ = nullptr;
  PlsConfig cfg_;
  std::vector<Candidate> cands_;
  std::size_t noise_id_ = 0;
  std::vector<std::size_t> duplicate_ids_;
};

TEST_F(FilterFixture, VerdictsSoundUnderRefit) {
  auto res = filter_candidates(*train_, *val_, cands_, cfg_);
  const double base = res.report.baseline_r2_val;
  EXPECT_EQ(res.report.decisions.size(), cands_.size());
  for (const auto& c : cands_) {
    if (c.verdict != Verdict::favorable)
      continue;
    const auto with = union_samples(*train_, make_dataset({{c.image, c.map}}));
    const auto m = fit_pls2(with.X, with.Y, cfg_.n_comp);
    EXPECT_GE(r2_score(val_->Y, predict(m, val_->X)), base);
  }
  for (auto id : duplicate_ids_) {
    EXPECT_EQ(cands_[id].verdict, Verdict::favorable) << id;
    EXPECT_EQ(cands_[id].r2_val_with, base);
  }
  EXPECT_EQ(cands_[noise_id_].verdict, Verdict::unfavorable);
  // Duplicates are already in the set and add no rows.
  EXPECT_EQ(res.augmented_train.rows(),
            train_->rows() + res.report.accepted_count - duplicate_ids_.size());

  // Same verdicts under permutation.
  std::map<std::size_t, Verdict> ref;
  for (const auto& c : cands_)
    ref[c.provenance.index] = c.verdict;
  std::mt19937_64 rng(1);
  auto shuffled = cands_;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  filter_candidates(*train_, *val_, shuffled, cfg_);
  for (const auto& c : shuffled)
    EXPECT_EQ(c.verdict, ref[c.provenance.index]);
}

TEST_F(FilterFixture, SequentialRaisesReference) {
  auto res = filter_candidates(*train_, *val_, cands_, cfg_, FilterMode::sequential);
  double ref = res.report.baseline_r2_val;
  for (const auto& d : res.report.decisions) {
    EXPECT_DOUBLE_EQ(d.baseline, ref);
    if (d.verdict == Verdict::favorable) {
      EXPECT_GE(d.r2_val_with, ref);
      ref = d.r2_val_with;
    }
  }
  EXPECT_LE(res.augmented_train.rows(), train_->rows() + res.report.accepted_count);
}

TEST_F(FilterFixture, CsvHasOneRowPerCandidate) {
  std::vector<Candidate> two(cands_.begin(), cands_.begin() + 2);
  auto res = filter_candidates(*train_, *val_, two, cfg_);
  const auto path = std::filesystem::temp_directory_path() / "skyaug_filter.csv";
  write_filter_csv(res.report, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "candidate_id,r2_val_with,verdict,baseline_r2_val,mode");
  std::size_t rows = 0;
  while (std::getline(in, line))
    ++rows;
  EXPECT_EQ(rows, two.size());
  std::filesystem::remove(path);
}

TEST_F(FilterFixture, NoCandidates) {
  std::vector<Candidate> none;
  auto res = filter_candidates(*train_, *val_, none, cfg_);
  EXPECT_EQ(res.report.accepted_count, 0u);
  EXPECT_EQ(res.augmented_train.X, train_->X);
}

TEST_F(FilterFixture, ErrorsOnEmptyOrMismatched) {
  Dataset empty{DesignMatrix(0, train_->X.cols()), DesignMatrix(0, train_->Y.cols())};
  EXPECT_THROW(baseline(empty, *val_, cfg_), DataError);
  EXPECT_THROW(baseline(*train_, empty, cfg_), DataError);
  std::vector<Candidate> wrong{{RawImage(4, 4), BinaryMap(4, 4), {}}};
  EXPECT_THROW(filter_candidates(*train_, *val_, wrong, cfg_), DataError);
}

TEST(Union, SkipsExistingSamples) {
  Dataset a{DesignMatrix::Identity(2, 2), DesignMatrix::Zero(2, 1)};
  Dataset b{DesignMatrix(2, 2), DesignMatrix::Zero(2, 1)};
  b.X << 1, 0, 3, 3;
  const auto u = union_samples(a, b);
  EXPECT_EQ(u.rows(), 3u);
  b.Y(0, 0) = 1; // same pixels, different label: a new sample
  EXPECT_EQ(union_samples(a, b).rows(), 4u);
}

TEST(FilterMode, Parse) {
  EXPECT_EQ(parse_filter_mode("sequential"), FilterMode::sequential);
  EXPECT_THROW(parse_filter_mode("greedy"), UsageError);
  EXPECT_EQ(to_string(Verdict::favorable), "favorable");
}

} // namespace
