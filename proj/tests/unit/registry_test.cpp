#include <gtest/gtest.h>

#include <fstream>

#include "oracles.hpp"
#include "refinder/errors.hpp"
#include "refinder/io/containers.hpp"
#include "refinder/service/registry.hpp"
#include "tempdir.hpp"

using namespace refinder;
using testing_support::TempDir;

namespace {

DatasetManifest write_dataset(const TempDir& dir, const std::string& name, std::size_t n, std::uint32_t seed) {
    oracle::Gen g(seed);
    DescriptorBlock b;
    b.count = n;
    b.dim = 6;
    b.values = oracle::random_vector(g, n * 6);
    write_descriptors(dir / (name + ".desc"), b);
    std::ofstream meta(dir / (name + ".jsonl"));
    for (std::size_t i = 0; i < n; ++i) meta << R"({"id": "x)" << i << R"(", "labels": []})" << "\n";
    meta.close();
    return {name, dir / (name + ".desc"), dir / (name + ".jsonl"), std::nullopt, std::nullopt};
}

}  // namespace

TEST(Fnv1a, KnownVectors) {
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
    EXPECT_EQ(fnv1a("bar", fnv1a("foo")), fnv1a("foobar"));
}

TEST(Registry, IngestBuildsIndexAndBackground) {
    TempDir dir;
    DatasetRegistry reg;
    const auto ds = reg.ingest(write_dataset(dir, "set", 100, 1));
    EXPECT_EQ(ds->index.size(), 100u);
    EXPECT_EQ(ds->name, "set");
    EXPECT_EQ(ds->handle.rfind("set-", 0), 0u);
    EXPECT_EQ(ds->handle.size(), 4u + 16u);
    ASSERT_NE(ds->background, nullptr);
    EXPECT_EQ(ds->background->dim(), 6u);
}

TEST(Registry, IdenticalFilesGiveSameHandle) {
    TempDir dir;
    DatasetRegistry reg;
    const DatasetManifest m = write_dataset(dir, "set", 50, 2);
    const auto a = reg.ingest(m);
    const auto b = reg.ingest(m);
    EXPECT_EQ(a->handle, b->handle);
    EXPECT_EQ(a.get(), b.get());
    EXPECT_EQ(reg.list().size(), 1u);

    // Same content in another directory hashes identically.
    TempDir other;
    DatasetRegistry reg2;
    EXPECT_EQ(reg2.ingest(write_dataset(other, "set", 50, 2))->handle, a->handle);
    // Different content does not.
    EXPECT_NE(reg2.ingest(write_dataset(other, "set", 50, 3))->handle, a->handle);
}

TEST(Registry, LookupByHandleOrUniqueName) {
    TempDir dir;
    DatasetRegistry reg;
    const auto a = reg.ingest(write_dataset(dir, "alpha", 20, 4));
    EXPECT_EQ(reg.get(a->handle).get(), a.get());
    EXPECT_EQ(reg.get("alpha").get(), a.get());
    EXPECT_THROW(reg.get("beta"), NotFoundError);
    TempDir other;
    reg.ingest(write_dataset(other, "alpha", 20, 5));
    EXPECT_THROW(reg.get("alpha"), NotFoundError);  // ambiguous
}

TEST(Registry, AddInMemoryEntries) {
    DatasetRegistry reg;
    std::vector<CorpusEntry> e{{"a", {1, 0}, {"x"}, "u"}, {"b", {0, 1}, {}, ""}, {"c", {1, 1}, {}, ""}};
    const auto a = reg.add("mem", e);
    const auto b = reg.add("mem", e);
    EXPECT_EQ(a->handle, b->handle);
    e[0].labels = {"y"};
    EXPECT_NE(reg.add("mem", e)->handle, a->handle);
}

TEST(Registry, IngestErrorsPropagate) {
    TempDir dir;
    DatasetRegistry reg;
    DatasetManifest m = write_dataset(dir, "set", 10, 6);
    m.count = 11;
    EXPECT_THROW(reg.ingest(m), IngestError);
    EXPECT_TRUE(reg.list().empty());
}
