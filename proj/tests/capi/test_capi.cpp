#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <cuedecomp/cuedecomp.h>

namespace fs = std::filesystem;

namespace {

struct Img {
    cd_image* p = nullptr;
    ~Img() { cd_image_free(p); }
};
struct Mask {
    cd_mask* p = nullptr;
    ~Mask() { cd_mask_free(p); }
};
struct Str {
    char* p = nullptr;
    ~Str() { cd_string_free(p); }
    std::string s() const { return p ? p : ""; }
};

std::vector<double> ramp(int w, int h, int c)
{
    std::vector<double> v(static_cast<std::size_t>(w * h * c));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = double((i * 37) % 256) / 255.0;
    return v;
}

bool same(const cd_image* a, const cd_image* b)
{
    int w1, h1, c1, w2, h2, c2;
    cd_image_info(a, &w1, &h1, &c1);
    cd_image_info(b, &w2, &h2, &c2);
    if (w1 != w2 || h1 != h2 || c1 != c2) return false;
    const double *x = cd_image_data(a), *y = cd_image_data(b);
    for (int i = 0; i < w1 * h1 * c1; ++i)
        if (x[i] != y[i]) return false;
    return true;
}

fs::path scratch()
{
    auto p = fs::temp_directory_path() / "cuedecomp_capi";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("status reporting")
{
    CHECK(std::string(cd_version()).size() > 0);
    CHECK(std::string(cd_status_name(CD_OK)) == "ok");
    Img img;
    CHECK(cd_image_new(0, 4, 1, nullptr, &img.p) == CD_INVALID_ARGUMENT);
    CHECK(std::string(cd_last_error()).size() > 0);
    CHECK(cd_image_new(4, 4, 1, nullptr, nullptr) == CD_INVALID_ARGUMENT);
    CHECK(cd_image_load("/no/such/file.png", &img.p) == CD_IO_ERROR);
    CHECK(img.p == nullptr);
    std::vector<double> bad{0.5, 2.0, 0.1, 0.2};
    CHECK(cd_image_new(2, 2, 1, bad.data(), &img.p) == CD_INVALID_ARGUMENT);
}

TEST_CASE("image and mask round trip through files")
{
    auto dir = scratch();
    auto data = ramp(6, 5, 3);
    Img a, b;
    REQUIRE(cd_image_new(6, 5, 3, data.data(), &a.p) == CD_OK);
    REQUIRE(cd_image_save(a.p, (dir / "a.png").c_str()) == CD_OK);
    REQUIRE(cd_image_load((dir / "a.png").c_str(), &b.p) == CD_OK);
    CHECK(same(a.p, b.p));

    std::vector<int32_t> labels{0, 1, 2, 255, 7, 7};
    Mask m, n;
    REQUIRE(cd_mask_new(3, 2, labels.data(), &m.p) == CD_OK);
    REQUIRE(cd_mask_save(m.p, (dir / "m.png").c_str()) == CD_OK);
    REQUIRE(cd_mask_load((dir / "m.png").c_str(), &n.p) == CD_OK);
    int w, h;
    cd_mask_info(n.p, &w, &h);
    CHECK(w == 3);
    CHECK(std::vector<int32_t>(cd_mask_data(n.p), cd_mask_data(n.p) + 6) == labels);

    Img r;
    REQUIRE(cd_image_resize_center_crop(a.p, 2, 10, 0, 10, 10, &r.p) == CD_OK);
    int rw, rh, rc;
    cd_image_info(r.p, &rw, &rh, &rc);
    CHECK(rw == 10);
    CHECK(rh == 10);
}

TEST_CASE("shape and texture transforms")
{
    auto data = ramp(16, 16, 3);
    Img a;
    REQUIRE(cd_image_new(16, 16, 3, data.data(), &a.p) == CD_OK);

    cd_eed_params p;
    cd_eed_params_default(&p);
    CHECK(p.steps == 16384);
    CHECK(p.tau == 0.2);
    p.steps = 0;
    Img e0;
    REQUIRE(cd_eed(a.p, &p, &e0.p) == CD_OK);
    CHECK(same(a.p, e0.p));
    p.steps = 5;
    p.tau = 0.5;
    Img bad;
    CHECK(cd_eed(a.p, &p, &bad.p) == CD_INVALID_ARGUMENT);

    std::vector<int32_t> labels(256);
    for (int i = 0; i < 256; ++i) labels[std::size_t(i)] = i;
    Mask m;
    REQUIRE(cd_mask_new(16, 16, labels.data(), &m.p) == CD_OK);
    Img v1, v2;
    Mask mo;
    Str prov;
    REQUIRE(cd_voronoi_shuffle(a.p, m.p, 6, 3, "s", &v1.p, &mo.p, &prov.p) == CD_OK);
    REQUIRE(cd_voronoi_shuffle(a.p, nullptr, 6, 3, "s", &v2.p, nullptr, nullptr) == CD_OK);
    CHECK(same(v1.p, v2.p));
    CHECK(prov.s().find("\"shifts\"") != std::string::npos);
    // the shuffled mask indexes the source pixel of each output pixel
    const double* src = cd_image_data(a.p);
    const double* out = cd_image_data(v1.p);
    const int32_t* idx = cd_mask_data(mo.p);
    for (int i = 0; i < 256; ++i)
        for (int c = 0; c < 3; ++c) CHECK(out[i * 3 + c] == src[idx[i] * 3 + c]);

    Img one;
    REQUIRE(cd_voronoi_shuffle(a.p, nullptr, 1, 3, "s", &one.p, nullptr, nullptr) == CD_OK);
    CHECK(same(a.p, one.p));

    Img pt, dm;
    Str pp, dp;
    REQUIRE(cd_patch_shuffle(a.p, nullptr, 4, 1, "k", &pt.p, nullptr, &pp.p) == CD_OK);
    CHECK(pp.s().find("permutation") != std::string::npos);
    REQUIRE(cd_diamond_shuffle(a.p, nullptr, 4, 1, "k", &dm.p, nullptr, &dp.p) == CD_OK);
    CHECK(dp.s().find("half_diag") != std::string::npos);
    Img odd;
    CHECK(cd_patch_shuffle(a.p, nullptr, 5, 1, "k", &odd.p, nullptr, nullptr) == CD_INVALID_ARGUMENT);

    Img t, tp;
    REQUIRE(cd_tex_eed(a.p, a.p, &t.p) == CD_OK);
    for (int i = 0; i < 768; ++i) CHECK(cd_image_data(t.p)[i] == 0.5);
    REQUIRE(cd_tex_eed_patched(a.p, a.p, 4, 1, "k", &tp.p, nullptr) == CD_OK);
    CHECK(same(t.p, tp.p));
}

TEST_CASE("composition, corruption, pairing")
{
    auto data = ramp(8, 8, 1);
    Img a, c, s;
    REQUIRE(cd_image_new(8, 8, 1, data.data(), &a.p) == CD_OK);
    REQUIRE(cd_compose(a.p, a.p, "blend", 1, 1, &c.p) == CD_OK);
    CHECK(same(a.p, c.p));
    CHECK(cd_compose(a.p, a.p, "mix", 1, 1, &s.p) == CD_INVALID_ARGUMENT);

    Img k1, k2, id;
    REQUIRE(cd_corrupt(a.p, "noise", 0.2, nullptr, 4, "x", &k1.p) == CD_OK);
    REQUIRE(cd_corrupt(a.p, "noise", 0.2, "uniform", 4, "x", &k2.p) == CD_OK);
    CHECK(same(k1.p, k2.p));
    REQUIRE(cd_corrupt(a.p, "contrast", 1.0, nullptr, 4, "x", &id.p) == CD_OK);
    CHECK(same(a.p, id.p));
    Img bad;
    CHECK(cd_corrupt(a.p, "fog", 1.0, nullptr, 4, "x", &bad.p) == CD_INVALID_ARGUMENT);
    CHECK(cd_corrupt(a.p, "phase", 200, nullptr, 4, "x", &bad.p) == CD_OUT_OF_RANGE);
    Str tag;
    REQUIRE(cd_corruption_tag("lowpass", 8, &tag.p) == CD_OK);
    CHECK(tag.s() == "corrupt:lowpass:8");

    cd_manifest *sh = nullptr, *tx = nullptr;
    REQUIRE(cd_manifest_new(&sh) == CD_OK);
    REQUIRE(cd_manifest_new(&tx) == CD_OK);
    CHECK(cd_manifest_append(sh, R"({"sample_id":"s1","image":"/x/s1.png","label":"cat","variant":"eed"})") == CD_OK);
    CHECK(cd_manifest_append(tx, R"({"sample_id":"t1","image":"/x/t1.png","label":"dog","variant":"voronoi"})") == CD_OK);
    CHECK(cd_manifest_append(tx, R"({"sample_id":"t1","image":"/x/t2.png"})") == CD_SCHEMA_ERROR);
    CHECK(cd_manifest_append(tx, "{oops") == CD_SCHEMA_ERROR);
    size_t n = 0;
    cd_manifest_size(tx, &n);
    CHECK(n == 1);
    Str pairs, entry;
    REQUIRE(cd_build_pairing(sh, tx, 1, "pairing", 0, &pairs.p) == CD_OK);
    CHECK(pairs.s().find("\"texture_id\":\"t1\"") != std::string::npos);
    REQUIRE(cd_manifest_entry(sh, 0, &entry.p) == CD_OK);
    CHECK(entry.s().find("\"label\":\"cat\"") != std::string::npos);
    Str none;
    CHECK(cd_manifest_entry(sh, 3, &none.p) == CD_OUT_OF_RANGE);

    auto dir = scratch();
    REQUIRE(cd_manifest_write(sh, (dir / "m.jsonl").c_str()) == CD_OK);
    cd_manifest* back = nullptr;
    REQUIRE(cd_manifest_read((dir / "m.jsonl").c_str(), &back) == CD_OK);
    cd_manifest_size(back, &n);
    CHECK(n == 1);
    cd_manifest_free(back);
    cd_manifest_free(sh);
    cd_manifest_free(tx);
}

TEST_CASE("metric tables")
{
    cd_table* t = nullptr;
    REQUIRE(cd_table_from_qualities(FIXTURE_DIR "/classification_table.csv", R"({"exclude_groups":["Trained"]})", &t) ==
            CD_OK);
    double rho = 0;
    int defined = 0;
    REQUIRE(cd_table_spearman(t, "s_cd", "cue_conflict", &rho, &defined) == CD_OK);
    CHECK(defined == 1);
    CHECK(std::fabs(rho - 0.905) < 0.02);
    CHECK(cd_table_spearman(t, "s_cd", "nope", &rho, &defined) != CD_OK);
    Str csv, md, meta;
    REQUIRE(cd_table_csv(t, &csv.p) == CD_OK);
    REQUIRE(cd_table_markdown(t, &md.p) == CD_OK);
    REQUIRE(cd_table_metadata(t, &meta.p) == CD_OK);
    CHECK(csv.s().find("ConvNeXt L") != std::string::npos);
    CHECK(meta.s().find("normalization_models") != std::string::npos);
    cd_table_free(t);

    cd_table* u = nullptr;
    CHECK(cd_table_from_qualities(FIXTURE_DIR "/classification_table.csv", R"({"bogus":1})", &u) == CD_SCHEMA_ERROR);

    auto dir = scratch();
    {
        FILE* f = std::fopen((dir / "log.jsonl").c_str(), "w");
        for (const char* v : {"original", "eed", "voronoi"})
            std::fprintf(f, "{\"model_id\":\"m\",\"variant\":\"%s\",\"sample_id\":\"a\",\"true\":1,\"pred\":1}\n", v);
        std::fclose(f);
    }
    const std::string lp = (dir / "log.jsonl").string();
    const char* paths[] = {lp.c_str()};
    cd_table* l = nullptr;
    REQUIRE(cd_table_from_logs(paths, 1, nullptr, &l) == CD_OK);
    Str lc;
    cd_table_csv(l, &lc.p);
    CHECK(lc.s().find("m,1,1,1,0.5,1") != std::string::npos);
    cd_table_free(l);

    const double x[] = {1, 2, 2, 4}, y[] = {1, 3, 2, 4}, z[] = {3, 3, 3, 3};
    REQUIRE(cd_spearman(x, y, 4, &rho, &defined) == CD_OK);
    CHECK(rho == doctest::Approx(4.5 / std::sqrt(22.5)));
    REQUIRE(cd_spearman(x, z, 4, &rho, &defined) == CD_OK);
    CHECK(defined == 0);
}

TEST_CASE("default config is valid JSON text")
{
    Str cfg;
    REQUIRE(cd_default_config(&cfg.p) == CD_OK);
    CHECK(cfg.s().find("\"eed\"") != std::string::npos);
    CHECK(cfg.s().find("16384") != std::string::npos);
}
