#include "tcb/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "support/synth.hpp"

namespace {

namespace fs = std::filesystem;

using tcb_test::TempDir;
using tcb_test::write_file;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult res;
  res.code = tcb::cli::run(args, out, err);
  res.out = out.str();
  res.err = err.str();
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Two newsgroup-style classes, three posts each, disjoint bodies.
void write_tree(const fs::path& root) {
  for (int i = 1; i <= 3; ++i)
    write_file(root / "alt.zoo" / std::to_string(i),
               "From: someone\nSubject: pets\n\nzebra yak alpaca zebra\n");
  for (int i = 1; i <= 3; ++i)
    write_file(root / "sci.physics" / std::to_string(i),
               "From: other\nSubject: fields\n\nquark boson lepton quark\n");
}

fs::path write_sep_tsv(const fs::path& dir) {
  std::string tsv;
  for (int i = 0; i < 3; ++i)
    tsv += "a" + std::to_string(i) + "\tA\tzebra zebra yak\n";
  for (int i = 0; i < 3; ++i)
    tsv += "b" + std::to_string(i) + "\tB\tquark quark boson\n";
  const fs::path path = dir / "sep.tsv";
  write_file(path, tsv);
  return path;
}

TEST(CliGeneral, NoArgsIsUsageError) {
  const CliResult res = run_cli({});
  EXPECT_EQ(res.code, 2);
}

TEST(CliGeneral, HelpExitsZero) {
  const CliResult res = run_cli({"--help"});
  EXPECT_EQ(res.code, 0);
  EXPECT_NE(res.out.find("prepare"), std::string::npos) << res.out;
  EXPECT_NE(res.out.find("benchmark"), std::string::npos) << res.out;

  const CliResult sub = run_cli({"train", "--help"});
  EXPECT_EQ(sub.code, 0);
  EXPECT_NE(sub.out.find("--vectors"), std::string::npos) << sub.out;
}

TEST(CliGeneral, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
}

TEST(CliPrepare, WritesVectorsAndVocabulary) {
  TempDir tmp;
  write_tree(tmp.path() / "tree");
  const std::string prefix = (tmp.path() / "data").string();
  const CliResult res = run_cli(
      {"prepare", "--source", "ng20", "--path", (tmp.path() / "tree").string(), "--out", prefix});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NE(res.out.find("loaded 6 documents, 2 classes"), std::string::npos) << res.out;

  const std::string vectors = slurp(prefix + ".vectors");
  EXPECT_EQ(vectors.rfind("p=", 0), 0u) << vectors;
  EXPECT_NE(vectors.find(" k=2 n=6\n"), std::string::npos) << vectors;
  EXPECT_NE(vectors.find("#classes\nalt.zoo\nsci.physics\n"), std::string::npos) << vectors;

  const std::string vocab = slurp(prefix + ".vocab");
  EXPECT_EQ(vocab.rfind("tcb-vocab v1\n", 0), 0u) << vocab;

  const std::string prefix2 = (tmp.path() / "again").string();
  const CliResult rerun = run_cli(
      {"prepare", "--source", "ng20", "--path", (tmp.path() / "tree").string(), "--out", prefix2});
  ASSERT_EQ(rerun.code, 0) << rerun.err;
  EXPECT_EQ(slurp(prefix2 + ".vectors"), vectors) << "same inputs must produce identical bytes";
  EXPECT_EQ(slurp(prefix2 + ".vocab"), vocab);
}

TEST(CliPrepare, MissingPathFailsWithoutPartialOutputs) {
  TempDir tmp;
  const std::string prefix = (tmp.path() / "data").string();
  const CliResult res = run_cli(
      {"prepare", "--source", "ng20", "--path", (tmp.path() / "nope").string(), "--out", prefix});
  EXPECT_EQ(res.code, 2);
  EXPECT_FALSE(res.err.empty());
  EXPECT_FALSE(fs::exists(prefix + ".vectors"));
  EXPECT_FALSE(fs::exists(prefix + ".vocab"));
  EXPECT_FALSE(fs::exists(prefix + ".vectors.tmp"));
}

TEST(CliPrepare, SubsetFlags) {
  TempDir tmp;
  write_tree(tmp.path() / "tree");
  const std::string prefix = (tmp.path() / "sub").string();
  const CliResult res =
      run_cli({"prepare", "--source", "ng20", "--path", (tmp.path() / "tree").string(), "--docs",
               "4", "--classes", "2", "--seed", "5", "--out", prefix, "--quiet"});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NE(slurp(prefix + ".vectors").find(" k=2 n=4\n"), std::string::npos);

  const CliResult bad = run_cli({"prepare", "--source", "ng20", "--path",
                                 (tmp.path() / "tree").string(), "--classes", "2"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("--classes requires --docs"), std::string::npos) << bad.err;
}

TEST(CliPrepare, RejectsUnknownSource) {
  EXPECT_EQ(run_cli({"prepare", "--source", "weird", "--path", "/tmp/x"}).code, 2);
}

// Shared fixture: prepared vectors + vocab + trained models for the
// separable corpus.
struct Workspace {
  TempDir tmp;
  std::string prefix;
  std::string vectors;
  std::string vocab;
  std::string svm_model;
  std::string rvm_model;

  Workspace() {
    const fs::path tsv = write_sep_tsv(tmp.path());
    prefix = (tmp.path() / "data").string();
    vectors = prefix + ".vectors";
    vocab = prefix + ".vocab";
    svm_model = (tmp.path() / "m.svm").string();
    rvm_model = (tmp.path() / "m.rvm").string();

    CliResult res = run_cli(
        {"prepare", "--source", "tsv", "--path", tsv.string(), "--out", prefix, "--quiet"});
    if (res.code != 0) throw std::runtime_error("prepare failed: " + res.err);
    res = run_cli({"train", "--model", "svm", "--vectors", vectors, "--out", svm_model, "--quiet"});
    if (res.code != 0) throw std::runtime_error("train svm failed: " + res.err);
    res = run_cli({"train", "--model", "rvm", "--vectors", vectors, "--out", rvm_model, "--quiet"});
    if (res.code != 0) throw std::runtime_error("train rvm failed: " + res.err);
  }
};

TEST(CliTrain, WritesModelsOfBothKinds) {
  Workspace ws;
  EXPECT_EQ(slurp(ws.svm_model).rfind("tcb-model v1 svm\n", 0), 0u);
  EXPECT_EQ(slurp(ws.rvm_model).rfind("tcb-model v1 rvm\n", 0), 0u);
}

TEST(CliTrain, ReportsProgressWhenNotQuiet) {
  Workspace ws;
  const std::string out = (ws.tmp.path() / "m2.svm").string();
  const CliResult res = run_cli({"train", "--model", "svm", "--vectors", ws.vectors, "--out", out});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NE(res.out.find("train seconds:"), std::string::npos) << res.out;
  EXPECT_NE(res.out.find("wrote " + out), std::string::npos) << res.out;
}

TEST(CliTrain, UsageAndIoErrors) {
  Workspace ws;
  EXPECT_EQ(run_cli({"train", "--model", "xyz", "--vectors", ws.vectors}).code, 2);
  EXPECT_EQ(
      run_cli({"train", "--model", "svm", "--vectors", (ws.tmp.path() / "no.vec").string()}).code,
      2);
  EXPECT_EQ(run_cli({"train", "--model", "svm"}).code, 2) << "--vectors is required";
}

TEST(CliEvaluate, PerfectOnItsOwnTrainingData) {
  Workspace ws;
  for (const std::string& model : {ws.svm_model, ws.rvm_model}) {
    const CliResult res = run_cli({"evaluate", "--model", model, "--vectors", ws.vectors});
    ASSERT_EQ(res.code, 0) << res.err;
    EXPECT_NE(res.out.find("n=6 k=2\n"), std::string::npos) << res.out;
    EXPECT_NE(res.out.find("micro_f1=1\n"), std::string::npos) << res.out;
    EXPECT_NE(res.out.find("accuracy=1\n"), std::string::npos) << res.out;
    EXPECT_NE(res.out.find("class A tp=3 fp=0 fn=0\n"), std::string::npos) << res.out;
  }
}

TEST(CliEvaluate, DimensionMismatchNamesBothSizes) {
  Workspace ws;
  const fs::path other = ws.tmp.path() / "other.vectors";
  write_file(other, "p=999 k=2 n=1\n0 0:1\n#classes\nA\nB\n");
  const CliResult res =
      run_cli({"evaluate", "--model", ws.svm_model, "--vectors", other.string()});
  EXPECT_EQ(res.code, 1);
  EXPECT_NE(res.err.find("model p=4"), std::string::npos) << res.err;
  EXPECT_NE(res.err.find("vectors p=999"), std::string::npos) << res.err;
}

TEST(CliEvaluate, ClassTableMismatchAndEmptyVectors) {
  Workspace ws;
  const fs::path renamed = ws.tmp.path() / "renamed.vectors";
  write_file(renamed, "p=4 k=2 n=1\n0 0:1\n#classes\nA\nC\n");
  const CliResult mismatch =
      run_cli({"evaluate", "--model", ws.svm_model, "--vectors", renamed.string()});
  EXPECT_EQ(mismatch.code, 1);
  EXPECT_NE(mismatch.err.find("class table"), std::string::npos) << mismatch.err;

  const fs::path empty = ws.tmp.path() / "empty.vectors";
  write_file(empty, "p=4 k=2 n=0\n#classes\nA\nB\n");
  const CliResult none =
      run_cli({"evaluate", "--model", ws.svm_model, "--vectors", empty.string()});
  EXPECT_EQ(none.code, 1);
  EXPECT_NE(none.err.find("no documents"), std::string::npos) << none.err;
}

TEST(CliPredict, SvmLabelsAClassADocument) {
  Workspace ws;
  const fs::path doc = ws.tmp.path() / "doc_a.txt";
  write_file(doc, "zebra zebra yak\n");
  const CliResult res = run_cli(
      {"predict", "--model", ws.svm_model, "--vocab", ws.vocab, "--input", doc.string()});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_EQ(res.out, doc.string() + "\tA\n");
}

TEST(CliPredict, StopwordOnlyDocumentStillClassifies) {
  Workspace ws;
  const fs::path doc = ws.tmp.path() / "stopwords.txt";
  write_file(doc, "the and of to a in\n");
  const CliResult res = run_cli(
      {"predict", "--model", ws.svm_model, "--vocab", ws.vocab, "--input", doc.string()});
  ASSERT_EQ(res.code, 0) << res.err;
  const std::size_t tab = res.out.find('\t');
  ASSERT_NE(tab, std::string::npos);
  const std::string label = res.out.substr(tab + 1, res.out.size() - tab - 2);
  EXPECT_TRUE(label == "A" || label == "B") << res.out;
}

TEST(CliPredict, RvmEmitsClassHeaderAndProbabilities) {
  Workspace ws;
  const fs::path batch = ws.tmp.path() / "batch.tsv";
  write_file(batch, "d1\tzebra zebra yak\nd2\tquark quark boson\n");
  const CliResult res = run_cli(
      {"predict", "--model", ws.rvm_model, "--vocab", ws.vocab, "--tsv", batch.string()});
  ASSERT_EQ(res.code, 0) << res.err;

  std::istringstream lines(res.out);
  std::string header;
  ASSERT_TRUE(std::getline(lines, header));
  EXPECT_EQ(header, "# classes\tA\tB");

  std::string line;
  int seen = 0;
  while (std::getline(lines, line)) {
    ++seen;
    std::istringstream cols(line);
    std::string id, label, probs;
    ASSERT_TRUE(std::getline(cols, id, '\t'));
    ASSERT_TRUE(std::getline(cols, label, '\t'));
    ASSERT_TRUE(std::getline(cols, probs));
    EXPECT_EQ(label, id == "d1" ? "A" : "B") << line;

    std::istringstream ps(probs);
    double sum = 0.0, v = 0.0;
    int count = 0;
    while (ps >> v) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
      sum += v;
      ++count;
    }
    EXPECT_EQ(count, 2);
    EXPECT_NEAR(sum, 1.0, 1e-9) << line;
  }
  EXPECT_EQ(seen, 2);
}

TEST(CliPredict, InputSourceValidation) {
  Workspace ws;
  const fs::path doc = ws.tmp.path() / "doc.txt";
  write_file(doc, "zebra\n");
  EXPECT_EQ(run_cli({"predict", "--model", ws.svm_model, "--vocab", ws.vocab}).code, 2)
      << "one of --input/--tsv required";
  EXPECT_EQ(run_cli({"predict", "--model", ws.svm_model, "--vocab", ws.vocab, "--input",
                     doc.string(), "--tsv", doc.string()})
                .code,
            2)
      << "--input and --tsv are mutually exclusive";
  EXPECT_EQ(run_cli({"predict", "--model", ws.svm_model, "--vocab",
                     (ws.tmp.path() / "no.vocab").string(), "--input", doc.string()})
                .code,
            2);

  const fs::path bad = ws.tmp.path() / "bad.tsv";
  write_file(bad, "no tab here\n");
  const CliResult res = run_cli(
      {"predict", "--model", ws.svm_model, "--vocab", ws.vocab, "--tsv", bad.string()});
  EXPECT_EQ(res.code, 1);
  EXPECT_NE(res.err.find("expected 2 tab-separated fields"), std::string::npos) << res.err;
}

TEST(CliBenchmark, RunsManifestAndWritesReports) {
  TempDir tmp;
  const fs::path tsv = write_sep_tsv(tmp.path());
  const fs::path manifest = tmp.path() / "suite.manifest";
  write_file(manifest, "# suite\nbench tsv " + tsv.string() + " 6 2 5\n");
  const std::string prefix = (tmp.path() / "report").string();

  const CliResult res = run_cli(
      {"benchmark", "--manifest", manifest.string(), "--folds", "2", "--out", prefix});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NE(res.out.find("dataset"), std::string::npos) << res.out;
  EXPECT_NE(res.out.find("bench"), std::string::npos) << res.out;

  const std::string csv = slurp(prefix + ".csv");
  EXPECT_EQ(csv.rfind("dataset,model,fold,micro_f1,macro_f1,train_seconds\n", 0), 0u) << csv;
  EXPECT_NE(csv.find("bench,svm,0,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("bench,rvm,1,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("# dataset=bench t="), std::string::npos) << csv;
  EXPECT_EQ(tcb::parse_benchmark_csv(csv).size(), 4u);

  const std::string table = slurp(prefix + ".txt");
  EXPECT_NE(table.find("svm-micro"), std::string::npos) << table;
}

TEST(CliBenchmark, EmptyManifestSucceedsWithHeaderOnlyCsv) {
  TempDir tmp;
  const fs::path manifest = tmp.path() / "empty.manifest";
  write_file(manifest, "# nothing to do\n\n");
  const std::string prefix = (tmp.path() / "report").string();
  const CliResult res = run_cli(
      {"benchmark", "--manifest", manifest.string(), "--out", prefix, "--quiet"});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_EQ(slurp(prefix + ".csv"), "dataset,model,fold,micro_f1,macro_f1,train_seconds\n");
}

TEST(CliBenchmark, ManifestSyntaxErrorIsUsageError) {
  TempDir tmp;
  const fs::path manifest = tmp.path() / "bad.manifest";
  write_file(manifest, "only two\n");
  const CliResult res = run_cli({"benchmark", "--manifest", manifest.string()});
  EXPECT_EQ(res.code, 2);
  EXPECT_NE(res.err.find("manifest line 1"), std::string::npos) << res.err;
}

TEST(CliBenchmark, DatasetFailureDoesNotAbortTheRun) {
  TempDir tmp;
  const fs::path tsv = write_sep_tsv(tmp.path());
  const fs::path manifest = tmp.path() / "mixed.manifest";
  write_file(manifest, "good tsv " + tsv.string() + " 6 2 5\nnope tsv " +
                           (tmp.path() / "missing.tsv").string() + " 6 2 5\n");
  const std::string prefix = (tmp.path() / "mixed").string();
  const CliResult res = run_cli(
      {"benchmark", "--manifest", manifest.string(), "--folds", "2", "--out", prefix, "--quiet"});
  EXPECT_EQ(res.code, 0) << res.err;
  const std::string csv = slurp(prefix + ".csv");
  EXPECT_NE(csv.find("good,svm,0,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("# dataset=nope FAILED"), std::string::npos) << csv;
}

TEST(CliBenchmark, FoldCountValidation) {
  TempDir tmp;
  const fs::path manifest = tmp.path() / "m.manifest";
  write_file(manifest, "");
  EXPECT_EQ(run_cli({"benchmark", "--manifest", manifest.string(), "--folds", "1"}).code, 2);
  EXPECT_EQ(run_cli({"benchmark", "--manifest", (tmp.path() / "no.manifest").string()}).code, 2);
}

std::string fold_csv(const std::string& dataset, const std::string& model,
                     const std::vector<double>& micro) {
  std::string text;
  for (std::size_t f = 0; f < micro.size(); ++f) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.17g,0.5,1.5\n", dataset.c_str(), model.c_str(),
                  f, micro[f]);
    text += buf;
  }
  return text;
}

const char* kCsvHeader = "dataset,model,fold,micro_f1,macro_f1,train_seconds\n";

TEST(CliStats, FileAgainstItselfIsNull) {
  TempDir tmp;
  const fs::path a = tmp.path() / "a.csv";
  write_file(a, kCsvHeader + fold_csv("d", "svm", {0.8, 0.81, 0.82}));
  const CliResult res = run_cli({"stats", a.string(), a.string()});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NE(res.out.find("# a=" + a.string() + ":svm b=" + a.string() + ":svm"),
            std::string::npos)
      << res.out;
  EXPECT_NE(res.out.find("0.0000"), std::string::npos) << res.out;
  EXPECT_EQ(res.out.find('*'), std::string::npos) << res.out;
}

TEST(CliStats, FrozenFivePointComparison) {
  TempDir tmp;
  const fs::path a = tmp.path() / "a.csv";
  const fs::path b = tmp.path() / "b.csv";
  write_file(a, kCsvHeader + fold_csv("d", "svm", {0.81, 0.82, 0.83, 0.84, 0.85}));
  write_file(b, kCsvHeader + fold_csv("d", "svm", {0.80, 0.80, 0.80, 0.80, 0.80}));
  const CliResult res = run_cli({"stats", a.string(), b.string()});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NE(res.out.find("4.2426"), std::string::npos) << res.out;
  EXPECT_NE(res.out.find("0.0132"), std::string::npos) << res.out;
  EXPECT_NE(res.out.find('*'), std::string::npos) << res.out;
  EXPECT_NE(res.out.find(" 4 "), std::string::npos) << "df column";
}

TEST(CliStats, MismatchedFoldsListMissingPairs) {
  TempDir tmp;
  const fs::path a = tmp.path() / "a.csv";
  const fs::path b = tmp.path() / "b.csv";
  write_file(a, kCsvHeader + fold_csv("d", "svm", {0.8, 0.81, 0.82, 0.83, 0.84}) +
                    fold_csv("extra", "svm", {0.5, 0.5}));
  write_file(b, kCsvHeader + fold_csv("d", "svm", {0.8, 0.81, 0.82, 0.83}));
  const CliResult res = run_cli({"stats", a.string(), b.string()});
  EXPECT_EQ(res.code, 1);
  EXPECT_NE(res.err.find("dataset d fold 4 missing from second file"), std::string::npos)
      << res.err;
  EXPECT_NE(res.err.find("dataset extra missing from second file"), std::string::npos)
      << res.err;
}

TEST(CliStats, ModelFiltersSelectRowsWithinOneFile) {
  TempDir tmp;
  const fs::path mixed = tmp.path() / "mixed.csv";
  write_file(mixed, kCsvHeader + fold_csv("d", "svm", {0.8, 0.8, 0.8}) +
                        fold_csv("d", "rvm", {0.9, 0.9, 0.9}));
  const CliResult res = run_cli(
      {"stats", mixed.string(), mixed.string(), "--model-a", "rvm", "--model-b", "svm"});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NE(res.out.find(":rvm b="), std::string::npos) << res.out;
  EXPECT_NE(res.out.find("inf"), std::string::npos) << "constant +0.1 difference saturates t";
  EXPECT_NE(res.out.find('*'), std::string::npos) << res.out;

  EXPECT_EQ(run_cli({"stats", mixed.string(), mixed.string(), "--model-a", "gbm"}).code, 2);
}

TEST(CliStats, IoAndFormatErrors) {
  TempDir tmp;
  const fs::path a = tmp.path() / "a.csv";
  write_file(a, kCsvHeader + fold_csv("d", "svm", {0.8, 0.9}));
  EXPECT_EQ(run_cli({"stats", a.string(), (tmp.path() / "no.csv").string()}).code, 2);

  const fs::path malformed = tmp.path() / "bad.csv";
  write_file(malformed, "not,a,benchmark\n");
  EXPECT_EQ(run_cli({"stats", a.string(), malformed.string()}).code, 1);

  const fs::path dup = tmp.path() / "dup.csv";
  write_file(dup, kCsvHeader + fold_csv("d", "svm", {0.8}) + fold_csv("d", "svm", {0.9}));
  const CliResult res = run_cli({"stats", dup.string(), a.string()});
  EXPECT_EQ(res.code, 1);
  EXPECT_NE(res.err.find("duplicate row"), std::string::npos) << res.err;
}

}  // namespace
