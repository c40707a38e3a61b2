#include "doctest.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "bdc/checkpoint.hpp"
#include "bdc/dcov.hpp"
#include "bdc/episode.hpp"
#include "bdc/errors.hpp"
#include "bdc/feature_bank.hpp"
#include "bdc/manifest.hpp"
#include "bdc/report.hpp"
#include "bdc/synthetic.hpp"
#include "support.hpp"

using namespace bdc;
using testing::between;
using testing::random_unit;
using Bytes = std::vector<std::uint8_t>;

namespace {

FeatureBank random_bank(Rng& rng, std::size_t items, bool maps) {
    FeatureBank b;
    b.dim = static_cast<std::uint32_t>(between(rng, 1, 12));
    if (maps) {
        b.map_rows = static_cast<std::uint32_t>(between(rng, 1, 5));
        b.map_cols = static_cast<std::uint32_t>(between(rng, 1, 6));
    }
    for (std::size_t i = 0; i < items; ++i) {
        BankItem it;
        const std::size_t len = rng.index(12);
        for (std::size_t c = 0; c < len; ++c) it.id.push_back(static_cast<char>('a' + rng.index(26)));
        it.id += "/" + std::to_string(i);
        if (i % 7 == 0) it.id += "\xc3\xa9"; // non-ASCII UTF-8
        it.label = static_cast<std::uint32_t>(rng.index(5));
        it.embedding = random_unit(rng, b.dim);
        if (maps) it.map = testing::random_matrix(rng, b.map_rows, b.map_cols, -10, 10);
        b.items.push_back(std::move(it));
    }
    return b;
}

Checkpoint random_checkpoint(Rng& rng) {
    Checkpoint c;
    const std::size_t n = between(rng, 1, 6), d = between(rng, 1, 10);
    c.head.weights = testing::gaussian_matrix(rng, n, d);
    const std::size_t in = between(rng, 1, 8);
    const auto kind = static_cast<ProjectionKind>(rng.index(3));
    c.projection.kind = kind;
    c.projection.in_dim = in;
    c.projection.out_dim = kind == ProjectionKind::identity ? in : between(rng, 1, in);
    c.projection.weights = testing::gaussian_matrix(rng, c.projection.out_dim, in);
    c.projection.seed = rng.next_u64();
    c.axis = rng.index(2) ? ObservationAxis::channels : ObservationAxis::positions;
    c.fusion = {rng.uniform(0, 5), rng.uniform(0.1, 5), rng.uniform(0.001, 1)};
    c.episode_seed = rng.next_u64();
    c.train_seed = rng.next_u64();
    c.shots = static_cast<std::uint32_t>(between(rng, 1, 16));
    c.text_init = rng.index(2) == 1;
    return c;
}

template <typename Fn>
FormatErrorKind error_kind(Fn&& fn, std::uint64_t* offset = nullptr) {
    try {
        fn();
    } catch (const FormatError& e) {
        if (offset) *offset = e.offset();
        return e.kind();
    }
    FAIL("expected a FormatError");
    return FormatErrorKind::io;
}

void put_u32(Bytes& bytes, std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
}

// Reads a little-endian f32 written at `at` directly from the byte stream.
float get_f32(const Bytes& bytes, std::size_t at) {
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(bytes[at + static_cast<std::size_t>(i)]) << (8 * i);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

Bytes file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("bank: empty bank round-trips") {
    FeatureBank b;
    b.dim = 3;
    const Bytes bytes = encode_bank(b);
    CHECK(bytes.size() == 28);
    CHECK(decode_bank(bytes) == b);
}

TEST_CASE("bank: 3-4-5 item round-trips bit-exactly") {
    FeatureBank b;
    b.dim = 2;
    b.items.push_back({"x", 1, {0.6, 0.8}, {}});
    round_to_storage(b);
    const Bytes bytes = encode_bank(b);
    const FeatureBank back = decode_bank(bytes);
    CHECK(back == b);
    CHECK(encode_bank(back) == bytes);
    CHECK(back.items[0].embedding[0] == static_cast<double>(0.6f));
}

TEST_CASE("bank: byte layout") {
    FeatureBank b;
    b.dim = 2;
    b.map_rows = 1;
    b.map_cols = 2;
    b.items.push_back({"ab", 7, {0.6, 0.8}, Matrix::from_rows({{1.5, -2.0}})});
    const Bytes bytes = encode_bank(b);
    CHECK(std::memcmp(bytes.data(), "FBNK", 4) == 0);
    CHECK(bytes[4] == 1);       // version, little-endian
    CHECK(bytes[8] == 1);       // item count
    CHECK(bytes[16] == 2);      // dim
    CHECK(bytes[20] == 1);      // map rows
    CHECK(bytes[24] == 2);      // map cols
    CHECK(bytes[28] == 2);      // id length
    CHECK(bytes[32] == 'a');
    CHECK(bytes[34] == 7);      // label
    CHECK(get_f32(bytes, 38) == 0.6f);
    CHECK(get_f32(bytes, 42) == 0.8f);
    CHECK(get_f32(bytes, 46) == 1.5f);
    CHECK(get_f32(bytes, 50) == -2.0f);
    CHECK(bytes.size() == 54);
}

TEST_CASE("bank: randomized round trips") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        FeatureBank b = random_bank(rng, between(rng, 0, 100), trial % 2 == 0);
        round_to_storage(b);
        const Bytes bytes = encode_bank(b);
        const FeatureBank back = decode_bank(bytes);
        CHECK(back == b);
        CHECK(encode_bank(back) == bytes);
    }
}

TEST_CASE("bank: file round trip") {
    testing::TempDir dir("bank");
    Rng rng(2);
    FeatureBank b = random_bank(rng, 20, true);
    round_to_storage(b);
    write_bank(dir / "b.bin", b);
    CHECK(read_bank(dir / "b.bin") == b);
    CHECK(error_kind([&] { read_bank(dir / "missing.bin"); }) == FormatErrorKind::io);
}

TEST_CASE("bank: corruption is reported with distinct errors and offsets") {
    Rng rng(3);
    FeatureBank b = random_bank(rng, 5, true);
    round_to_storage(b);
    const Bytes good = encode_bank(b);

    SUBCASE("bad magic") {
        Bytes bad = good;
        bad[0] = 'X';
        std::uint64_t off = 99;
        CHECK(error_kind([&] { decode_bank(bad); }, &off) == FormatErrorKind::bad_magic);
        CHECK(off == 0);
    }
    SUBCASE("version mismatch") {
        Bytes bad = good;
        put_u32(bad, 4, 2);
        std::uint64_t off = 99;
        CHECK(error_kind([&] { decode_bank(bad); }, &off) == FormatErrorKind::version_mismatch);
        CHECK(off == 4);
    }
    SUBCASE("every truncation") {
        for (std::size_t len = 0; len < good.size(); ++len) {
            const std::span<const std::uint8_t> prefix(good.data(), len);
            std::uint64_t off = 0;
            const FormatErrorKind k = error_kind([&] { decode_bank(prefix); }, &off);
            CHECK((k == FormatErrorKind::truncated || (len < 4 && k == FormatErrorKind::bad_magic)));
            CHECK(off <= len);
        }
    }
    SUBCASE("trailing bytes") {
        Bytes bad = good;
        bad.push_back(0);
        std::uint64_t off = 0;
        CHECK(error_kind([&] { decode_bank(bad); }, &off) == FormatErrorKind::trailing_bytes);
        CHECK(off == good.size());
    }
    SUBCASE("norm violation points at the embedding") {
        Bytes bad = good;
        const std::size_t id_len = b.items[0].id.size();
        const std::size_t emb = 28 + 4 + id_len + 4;
        const float v = get_f32(bad, emb) * 1.5f + 0.5f;
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        put_u32(bad, emb, u);
        std::uint64_t off = 0;
        CHECK(error_kind([&] { decode_bank(bad); }, &off) == FormatErrorKind::norm_violation);
        CHECK(off == emb);
    }
    SUBCASE("unit-norm check at write time") {
        FeatureBank wrong = b;
        wrong.items[1].embedding[0] += 0.1;
        CHECK_THROWS_AS(encode_bank(wrong), DataError);
    }
}

TEST_CASE("checkpoint: randomized round trips are bit-exact") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const Checkpoint c = random_checkpoint(rng);
        const Bytes bytes = encode_checkpoint(c);
        const Checkpoint back = decode_checkpoint(bytes);
        CHECK(back == c);
        CHECK(encode_checkpoint(back) == bytes);
    }
}

TEST_CASE("checkpoint: NaN-free bit patterns survive, including negative zero") {
    Rng rng(5);
    Checkpoint c = random_checkpoint(rng);
    c.head.weights(0, 0) = -0.0;
    c.head.weights.data().back() = 4.9e-324;
    const Checkpoint back = decode_checkpoint(encode_checkpoint(c));
    CHECK(std::signbit(back.head.weights(0, 0)));
    CHECK(back.head.weights.data().back() == 4.9e-324);
}

TEST_CASE("checkpoint: corruption and version errors") {
    Rng rng(6);
    const Checkpoint c = random_checkpoint(rng);
    const Bytes good = encode_checkpoint(c);

    SUBCASE("flipped payload byte") {
        for (std::size_t at = 16; at + 8 < good.size(); at += 3) {
            Bytes bad = good;
            bad[at] ^= 0x40;
            CHECK(error_kind([&] { decode_checkpoint(bad); }) == FormatErrorKind::checksum_mismatch);
        }
    }
    SUBCASE("flipped checksum byte") {
        Bytes bad = good;
        bad.back() ^= 1;
        CHECK(error_kind([&] { decode_checkpoint(bad); }) == FormatErrorKind::checksum_mismatch);
    }
    SUBCASE("old version") {
        Bytes bad = good;
        put_u32(bad, 4, 0);
        CHECK(error_kind([&] { decode_checkpoint(bad); }) == FormatErrorKind::version_mismatch);
    }
    SUBCASE("wrong magic") {
        Bytes bad = good;
        bad[3] = 'X';
        CHECK(error_kind([&] { decode_checkpoint(bad); }) == FormatErrorKind::bad_magic);
        CHECK(error_kind([&] { decode_prototypes(good); }) == FormatErrorKind::bad_magic);
    }
    SUBCASE("truncation") {
        for (std::size_t len = 4; len < good.size(); len += 5) {
            const std::span<const std::uint8_t> prefix(good.data(), len);
            const FormatErrorKind k = error_kind([&] { decode_checkpoint(prefix); });
            CHECK(k == FormatErrorKind::truncated);
        }
    }
    SUBCASE("files") {
        testing::TempDir dir("ckpt");
        save_checkpoint(dir / "c.ckpt", c);
        CHECK(load_checkpoint(dir / "c.ckpt") == c);
        CHECK(file_bytes(dir / "c.ckpt") == good);
    }
}

TEST_CASE("prototype file round trip") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        PrototypeFile f;
        f.prototypes.side = between(rng, 1, 5);
        f.prototypes.shots = between(rng, 1, 8);
        f.prototypes.prototypes = testing::gaussian_matrix(rng, between(rng, 1, 4), f.prototypes.side * f.prototypes.side);
        f.projection = random_checkpoint(rng).projection;
        f.axis = ObservationAxis::positions;
        f.episode_seed = rng.next_u64();
        CHECK(decode_prototypes(encode_prototypes(f)) == f);
    }
}

TEST_CASE("manifest") {
    Manifest m;
    m.classes = {"cat", "dog"};
    m.prompts = {"a photo of a"};
    m.splits = {{"a", Split::train}, {"b", Split::val}, {"c", Split::test}};

    SUBCASE("round trip") {
        CHECK(decode_manifest(encode_manifest(m)) == m);
        testing::TempDir dir("manifest");
        write_manifest(dir / "m.json", m);
        CHECK(read_manifest(dir / "m.json") == m);
    }
    SUBCASE("malformed") {
        CHECK(error_kind([&] { decode_manifest("{"); }) == FormatErrorKind::malformed);
        CHECK(error_kind([&] { decode_manifest(R"({"format":"other","version":1})"); }) ==
              FormatErrorKind::bad_magic);
        CHECK(error_kind([&] {
                  decode_manifest(R"({"format":"bdc-manifest","version":9,"classes":[],"prompts":[],"splits":{}})");
              }) == FormatErrorKind::version_mismatch);
        CHECK(error_kind([&] {
                  decode_manifest(R"({"format":"bdc-manifest","version":1,"classes":[],"prompts":[],"splits":{"a":"dev"}})");
              }) == FormatErrorKind::malformed);
    }
    SUBCASE("validation against a bank") {
        FeatureBank b;
        b.dim = 1;
        for (const char* id : {"a", "b", "c"}) b.items.push_back({id, 1, {1.0}, {}});
        CHECK_NOTHROW(validate_manifest(m, b));

        Manifest missing = m;
        missing.splits["zzz"] = Split::test;
        CHECK_THROWS_AS(validate_manifest(missing, b), DataError);

        FeatureBank bad_label = b;
        bad_label.items[0].label = 2;
        CHECK_THROWS_AS(validate_manifest(m, bad_label), DataError);

        FeatureBank dup = b;
        dup.items.push_back({"a", 0, {1.0}, {}});
        CHECK_THROWS_AS(validate_manifest(m, dup), DataError);
    }
}

TEST_CASE("sample_episode") {
    SynthSpec s;
    s.classes = 3;
    s.shots = 10;
    s.queries = 12;
    s.val_queries = 6;
    s.channels = 6;
    s.positions = 4;
    const SyntheticData d = generate_synthetic(s);

    SUBCASE("full class size takes the whole class") {
        const Episode e = sample_episode(d.bank, d.manifest, 10, 1);
        for (std::size_t c = 0; c < 3; ++c) {
            std::set<std::size_t> got(e.support[c].begin(), e.support[c].end());
            std::set<std::size_t> want;
            for (std::size_t i = 0; i < d.bank.items.size(); ++i) {
                const auto& it = d.bank.items[i];
                if (it.label == c && d.manifest.splits.count(it.id) && d.manifest.splits.at(it.id) == Split::train)
                    want.insert(i);
            }
            CHECK(got == want);
        }
        CHECK(e.queries.size() == 12);
        CHECK(e.text.size() == 3);
    }
    SUBCASE("same seed, same episode") {
        CHECK(sample_episode(d.bank, d.manifest, 5, 42) == sample_episode(d.bank, d.manifest, 5, 42));
    }
    SUBCASE("different seeds give different supports") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Episode a = sample_episode(d.bank, d.manifest, 5, 2 * seed);
            const Episode b = sample_episode(d.bank, d.manifest, 5, 2 * seed + 1);
            bool differ = false;
            for (std::size_t c = 0; c < 3; ++c) {
                std::set<std::size_t> sa(a.support[c].begin(), a.support[c].end());
                std::set<std::size_t> sb(b.support[c].begin(), b.support[c].end());
                differ = differ || sa != sb;
            }
            CHECK(differ);
        }
    }
    SUBCASE("exactly M per class, no repeats, right labels") {
        Rng rng(8);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t m = between(rng, 1, 10);
            const Episode e = sample_episode(d.bank, d.manifest, m, rng.next_u64());
            REQUIRE(e.support.size() == 3);
            for (std::size_t c = 0; c < 3; ++c) {
                CHECK(e.support[c].size() == m);
                CHECK(std::set<std::size_t>(e.support[c].begin(), e.support[c].end()).size() == m);
                for (std::size_t idx : e.support[c]) CHECK(d.bank.items[idx].label == c);
            }
        }
    }
    SUBCASE("too few items") {
        CHECK_THROWS_AS(sample_episode(d.bank, d.manifest, 11, 0), DataError);
        CHECK_THROWS_AS(sample_episode(d.bank, d.manifest, 0, 0), DataError);
    }
    SUBCASE("validation split as queries") {
        const Episode e = sample_episode(d.bank, d.manifest, 2, 0, Split::val);
        CHECK(e.queries.size() == 6);
        for (std::size_t idx : e.queries) CHECK(d.bank.items[idx].id.rfind("val/", 0) == 0);
    }
}

TEST_CASE("generate_synthetic: dependence is planted in the pairing") {
    SynthSpec s;
    s.classes = 2;
    s.noise = 0.0;
    const SyntheticData d = generate_synthetic(s);
    REQUIRE(d.pairings[0] != d.pairings[1]);
    const std::size_t h = s.channels / 2;

    const Episode e = sample_episode(d.bank, d.manifest, s.shots, 3);
    for (std::size_t c = 0; c < 2; ++c) {
        // Pool every support position of this class: n = positions * shots.
        const std::size_t n = s.positions * s.shots;
        auto channel = [&](std::size_t ch) {
            Vector v;
            v.reserve(n);
            for (std::size_t idx : e.support[c])
                for (std::size_t p = 0; p < s.positions; ++p) v.push_back(d.bank.items[idx].map(ch, p));
            return v;
        };
        for (std::size_t j = 0; j < h; ++j) {
            const std::size_t src = d.pairings[c][j];
            const std::size_t other = (src + 1) % h;
            const double paired = dcorr(column(channel(src)), column(channel(h + j)));
            const double unpaired = dcorr(column(channel(other)), column(channel(h + j)));
            CHECK(paired > 0.5);
            CHECK(unpaired < 0.15);
        }
    }
}

TEST_CASE("generate_synthetic: marginals do not reveal the class") {
    const SynthSpec s;
    const SyntheticData d = generate_synthetic(s);
    std::vector<std::vector<double>> mean(s.classes, std::vector<double>(s.channels, 0.0));
    std::vector<std::vector<double>> sq(s.classes, std::vector<double>(s.channels, 0.0));
    std::vector<double> count(s.classes, 0.0);
    for (const BankItem& it : d.bank.items) {
        if (is_text_item(it)) continue;
        count[it.label] += static_cast<double>(s.positions);
        for (std::size_t c = 0; c < s.channels; ++c)
            for (std::size_t p = 0; p < s.positions; ++p) {
                mean[it.label][c] += it.map(c, p);
                sq[it.label][c] += it.map(c, p) * it.map(c, p);
            }
    }
    for (std::size_t c = 0; c < s.channels; ++c) {
        for (std::size_t a = 0; a < s.classes; ++a)
            for (std::size_t b = a + 1; b < s.classes; ++b) {
                const double ma = mean[a][c] / count[a], mb = mean[b][c] / count[b];
                const double va = sq[a][c] / count[a] - ma * ma, vb = sq[b][c] / count[b] - mb * mb;
                CHECK(std::abs(ma - mb) < 0.05);
                CHECK(std::abs(va - vb) < 0.05);
            }
    }
}

TEST_CASE("generate_synthetic: layout and determinism") {
    const SynthSpec s;
    const SyntheticData a = generate_synthetic(s);
    const SyntheticData b = generate_synthetic(s);
    CHECK(encode_bank(a.bank) == encode_bank(b.bank));
    CHECK(encode_manifest(a.manifest) == encode_manifest(b.manifest));

    SynthSpec other = s;
    other.seed = s.seed + 1;
    CHECK(encode_bank(generate_synthetic(other).bank) != encode_bank(a.bank));

    CHECK(a.bank.items.size() == s.classes * (1 + s.shots) + s.queries + s.val_queries);
    CHECK(a.bank.map_rows == s.channels);
    CHECK(a.bank.map_cols == s.positions);
    CHECK_NOTHROW(validate_manifest(a.manifest, a.bank));
    std::set<std::vector<std::size_t>> distinct(a.pairings.begin(), a.pairings.end());
    CHECK(distinct.size() == s.classes);
    for (const BankItem& it : a.bank.items) CHECK(std::abs(l2_norm(it.embedding) - 1.0) < 1e-5);

    // Stored values are already float-exact, so the bank survives a write/read cycle.
    CHECK(decode_bank(encode_bank(a.bank)) == a.bank);
}

TEST_CASE("generate_synthetic: errors") {
    SynthSpec s;
    s.channels = 1;
    CHECK_THROWS_AS(generate_synthetic(s), DataError);
    s.channels = 4; // two sources allow only two pairings
    s.classes = 3;
    CHECK_THROWS_AS(generate_synthetic(s), DataError);
    s.classes = 2;
    CHECK_NOTHROW(generate_synthetic(s));
    s.noise = -1.0;
    CHECK_THROWS_AS(generate_synthetic(s), DataError);
    s.noise = 0.1;
    s.shots = 0;
    CHECK_THROWS_AS(generate_synthetic(s), DataError);
}

TEST_CASE("report formats are line-delimited JSON") {
    AccuracyReport r;
    r.correct = 1;
    r.total = 2;
    r.accuracy = 0.5;
    r.class_counts = {1, 1};
    r.per_class = {1.0, 0.0};
    r.confusion = {{1, 0}, {1, 0}};
    r.records.push_back({"q0", 0, {0, {0.9, 0.1}, {0.3, 0.2}, {1.2, 0.3}}});
    r.records.push_back({"q1", 1, {0, {0.8, 0.2}, {0.1, 0.0}, {0.9, 0.2}}});
    const std::string text = format_report(r, {"a", "b"}, nlohmann::json{{"seed", 1}});

    std::vector<nlohmann::json> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = text.find('\n', start);
        REQUIRE(end != std::string::npos);
        lines.push_back(nlohmann::json::parse(text.substr(start, end - start)));
        start = end + 1;
    }
    REQUIRE(lines.size() == 3);
    CHECK(lines[0]["record"] == "query");
    CHECK(lines[0]["id"] == "q0");
    CHECK(lines[1]["truth"] == 1);
    CHECK(lines[2]["record"] == "summary");
    CHECK(lines[2]["accuracy"] == 0.5);

    const std::string ab = format_ablation({{"x", 0.25}, {"y", 0.5}}, nlohmann::json::object());
    CHECK(std::count(ab.begin(), ab.end(), '\n') == 3);
    CHECK(nlohmann::json::parse(ab.substr(0, ab.find('\n')))["row"] == "x");
}
