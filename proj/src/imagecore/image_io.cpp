#include "imagecore/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <jpeglib.h>
#include <png.h>

#include "common/error.hpp"

namespace cuedecomp {

namespace fs = std::filesystem;

std::uint8_t quantize(double v)
{
    double q = std::floor(v * 255.0 + 0.5);
    return std::uint8_t(std::clamp(q, 0.0, 255.0));
}

std::vector<std::uint8_t> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(Errc::io_error, "read failed: " + path);
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes)
{
    auto parent = fs::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) fs::create_directories(parent, ec);
    // write-then-rename so a failed run never leaves a half-written raster
    std::string tmp = path + ".part";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(Errc::io_error, "cannot write " + path);
        out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
        if (!out) fail(Errc::io_error, "write failed: " + path);
    }
    fs::rename(tmp, path, ec);
    if (ec) fail(Errc::io_error, "cannot write " + path + ": " + ec.message());
}

RasterFormat sniff_format(std::span<const std::uint8_t> b)
{
    static const std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (b.size() >= 8 && std::memcmp(b.data(), png_sig, 8) == 0) return RasterFormat::png;
    if (b.size() >= 3 && b[0] == 0xff && b[1] == 0xd8 && b[2] == 0xff) return RasterFormat::jpeg;
    if (b.size() >= 2 && b[0] == 'P' && (b[1] == '2' || b[1] == '3' || b[1] == '5' || b[1] == '6'))
        return RasterFormat::pnm;
    return RasterFormat::unknown;
}

namespace {

// ---- PNG -------------------------------------------------------------------

struct RawPng {
    int width = 0, height = 0, bit_depth = 0, color_type = 0, channels = 0;
    std::vector<std::uint8_t> rows; // unpacked to >= 8 bits
    std::vector<png_color> palette;
};

struct MemReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n)
{
    auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
    if (r->pos + n > r->size) png_error(png, "unexpected end of data");
    std::memcpy(out, r->data + r->pos, n);
    r->pos += n;
}

struct PngErr {
    char msg[256];
};

void png_err_fn(png_structp png, png_const_charp m)
{
    auto* e = static_cast<PngErr*>(png_get_error_ptr(png));
    std::snprintf(e->msg, sizeof e->msg, "%s", m);
    png_longjmp(png, 1);
}

void png_warn_fn(png_structp, png_const_charp) {}

// Objects with destructors are all constructed before setjmp; longjmp
// only returns into this frame.
bool decode_png_raw(std::span<const std::uint8_t> bytes, RawPng& out, PngErr& err)
{
    MemReader rd{bytes.data(), bytes.size(), 0};
    std::vector<png_bytep> row_ptrs;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_err_fn, png_warn_fn);
    if (!png) {
        std::snprintf(err.msg, sizeof err.msg, "out of memory");
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, &rd, png_mem_read);
    png_read_info(png, info);
    out.width = int(png_get_image_width(png, info));
    out.height = int(png_get_image_height(png, info));
    out.bit_depth = png_get_bit_depth(png, info);
    out.color_type = png_get_color_type(png, info);
    if (out.bit_depth < 8) png_set_packing(png);
    if (out.color_type == PNG_COLOR_TYPE_PALETTE) {
        png_colorp pal = nullptr;
        int n = 0;
        if (png_get_PLTE(png, info, &pal, &n)) out.palette.assign(pal, pal + n);
    } else if (out.color_type == PNG_COLOR_TYPE_GRAY && out.bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (out.bit_depth == 16) png_set_swap(png); // host little-endian samples
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    out.channels = png_get_channels(png, info);
    std::size_t rowbytes = png_get_rowbytes(png, info);
    out.rows.resize(rowbytes * std::size_t(out.height));
    row_ptrs.resize(std::size_t(out.height));
    for (int y = 0; y < out.height; ++y) row_ptrs[std::size_t(y)] = out.rows.data() + rowbytes * std::size_t(y);
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

RawPng read_png(std::span<const std::uint8_t> bytes, const std::string& name)
{
    RawPng raw;
    PngErr err{};
    if (!decode_png_raw(bytes, raw, err)) fail(Errc::decode_error, name + ": " + err.msg);
    return raw;
}

Image png_to_image(const RawPng& raw, const std::string& name)
{
    if (raw.bit_depth == 16) fail(Errc::unsupported_bit_depth, name + ": 16-bit images are not supported");
    const bool palette = raw.color_type == PNG_COLOR_TYPE_PALETTE;
    const bool color = palette || (raw.color_type & PNG_COLOR_MASK_COLOR);
    Image img(raw.width, raw.height, color ? 3 : 1);
    const std::size_t n = img.pixels();
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* px = raw.rows.data() + i * std::size_t(raw.channels);
        if (palette) {
            if (px[0] >= raw.palette.size()) fail(Errc::decode_error, name + ": palette index out of range");
            const png_color& pc = raw.palette[px[0]];
            img.data[i * 3 + 0] = pc.red / 255.0;
            img.data[i * 3 + 1] = pc.green / 255.0;
            img.data[i * 3 + 2] = pc.blue / 255.0;
        } else {
            for (int c = 0; c < img.channels; ++c) img.data[i * std::size_t(img.channels) + std::size_t(c)] = px[c] / 255.0;
        }
    }
    return img;
}

struct VecWriter {
    std::vector<std::uint8_t>* out;
};

void png_mem_write(png_structp png, png_bytep data, png_size_t n)
{
    auto* w = static_cast<VecWriter*>(png_get_io_ptr(png));
    w->out->insert(w->out->end(), data, data + n);
}

void png_mem_flush(png_structp) {}

bool encode_png_raw(int width, int height, int color_type, int bit_depth, const std::vector<std::uint8_t>& rows,
                    std::vector<std::uint8_t>& out, PngErr& err)
{
    VecWriter wr{&out};
    std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(height));
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_err_fn, png_warn_fn);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &wr, png_mem_write, png_mem_flush);
    png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    int ch = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    std::size_t rowbytes = std::size_t(width) * std::size_t(ch) * std::size_t(bit_depth / 8);
    for (int y = 0; y < height; ++y)
        row_ptrs[std::size_t(y)] = const_cast<png_bytep>(rows.data() + rowbytes * std::size_t(y));
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

// ---- JPEG ------------------------------------------------------------------

struct JpegErr {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char msg[JMSG_LENGTH_MAX];
};

void jpeg_err_exit(j_common_ptr cinfo)
{
    auto* e = reinterpret_cast<JpegErr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, e->msg);
    std::longjmp(e->jump, 1);
}

void jpeg_quiet(j_common_ptr, int) {}

bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, int& w, int& h, int& ch, std::vector<std::uint8_t>& pix,
                     JpegErr& err)
{
    jpeg_decompress_struct cinfo;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_err_exit;
    err.mgr.emit_message = jpeg_quiet;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
        std::snprintf(err.msg, sizeof err.msg, "CMYK JPEG not supported");
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);
    w = int(cinfo.output_width);
    h = int(cinfo.output_height);
    ch = cinfo.output_components;
    pix.resize(std::size_t(w) * std::size_t(h) * std::size_t(ch));
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pix.data() + std::size_t(cinfo.output_scanline) * std::size_t(w) * std::size_t(ch);
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

// ---- PNM -------------------------------------------------------------------

struct PnmReader {
    std::span<const std::uint8_t> b;
    std::size_t pos = 2;
    const std::string& name;

    void skip_ws()
    {
        while (pos < b.size()) {
            if (b[pos] == '#') {
                while (pos < b.size() && b[pos] != '\n') ++pos;
            } else if (std::isspace(b[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    }
    long number()
    {
        skip_ws();
        if (pos >= b.size() || !std::isdigit(b[pos])) fail(Errc::decode_error, name + ": malformed PNM header");
        long v = 0;
        while (pos < b.size() && std::isdigit(b[pos])) {
            v = v * 10 + (b[pos] - '0');
            if (v > 1'000'000'000) fail(Errc::decode_error, name + ": PNM value too large");
            ++pos;
        }
        return v;
    }
};

struct RawPnm {
    int width, height, channels;
    long maxval;
    std::vector<long> samples;
};

RawPnm read_pnm(std::span<const std::uint8_t> bytes, const std::string& name)
{
    PnmReader r{bytes, 2, name};
    char kind = char(bytes[1]);
    RawPnm p{};
    p.channels = (kind == '3' || kind == '6') ? 3 : 1;
    p.width = int(r.number());
    p.height = int(r.number());
    p.maxval = r.number();
    if (p.width <= 0 || p.height <= 0) fail(Errc::decode_error, name + ": bad PNM dimensions");
    if (p.maxval <= 0) fail(Errc::decode_error, name + ": bad PNM maxval");
    if (p.maxval > 255) fail(Errc::unsupported_bit_depth, name + ": PNM maxval above 255");
    std::size_t n = std::size_t(p.width) * std::size_t(p.height) * std::size_t(p.channels);
    p.samples.resize(n);
    if (kind == '5' || kind == '6') {
        ++r.pos; // single whitespace after maxval
        if (r.pos + n > bytes.size()) fail(Errc::decode_error, name + ": truncated PNM data");
        for (std::size_t i = 0; i < n; ++i) p.samples[i] = bytes[r.pos + i];
    } else {
        for (std::size_t i = 0; i < n; ++i) p.samples[i] = r.number();
    }
    for (long s : p.samples)
        if (s > p.maxval) fail(Errc::decode_error, name + ": PNM sample exceeds maxval");
    return p;
}

std::string lower_ext(const std::string& path)
{
    std::string e = fs::path(path).extension().string();
    for (auto& ch : e) ch = char(std::tolower(static_cast<unsigned char>(ch)));
    return e;
}

std::vector<std::uint8_t> encode_pnm(const Image& img)
{
    std::string head = std::string(img.channels == 3 ? "P6" : "P5") + "\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(head.begin(), head.end());
    out.reserve(out.size() + img.data.size());
    for (double v : img.data) out.push_back(quantize(v));
    return out;
}

} // namespace

Image decode_image(std::span<const std::uint8_t> bytes, const std::string& name)
{
    switch (sniff_format(bytes)) {
    case RasterFormat::png: return png_to_image(read_png(bytes, name), name);
    case RasterFormat::jpeg: {
        int w = 0, h = 0, ch = 0;
        std::vector<std::uint8_t> pix;
        JpegErr err{};
        if (!decode_jpeg_raw(bytes, w, h, ch, pix, err)) fail(Errc::decode_error, name + ": " + err.msg);
        Image img(w, h, ch == 1 ? 1 : 3);
        for (std::size_t i = 0; i < pix.size(); ++i) img.data[i] = pix[i] / 255.0;
        return img;
    }
    case RasterFormat::pnm: {
        RawPnm p = read_pnm(bytes, name);
        Image img(p.width, p.height, p.channels);
        for (std::size_t i = 0; i < p.samples.size(); ++i) img.data[i] = double(p.samples[i]) / double(p.maxval);
        return img;
    }
    case RasterFormat::unknown: break;
    }
    fail(Errc::unsupported_format, name + ": unrecognized raster format");
}

Image load_image(const std::string& path)
{
    auto bytes = read_file(path);
    return decode_image(bytes, path);
}

std::vector<std::uint8_t> encode_png(const Image& img)
{
    validate(img);
    std::vector<std::uint8_t> rows(img.data.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = quantize(img.data[i]);
    std::vector<std::uint8_t> out;
    PngErr err{};
    if (!encode_png_raw(img.width, img.height, img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, 8, rows,
                        out, err))
        fail(Errc::io_error, std::string("png encode failed: ") + err.msg);
    return out;
}

void save_image(const Image& img, const std::string& path)
{
    std::string ext = lower_ext(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
        validate(img);
        if ((ext == ".pgm" && img.channels != 1) || (ext == ".ppm" && img.channels != 3))
            fail(Errc::invalid_argument, path + ": channel count does not match PNM flavour");
        write_file(path, encode_pnm(img));
        return;
    }
    if (ext == ".jpg" || ext == ".jpeg")
        fail(Errc::unsupported_format, path + ": outputs must use a lossless container (png, pgm, ppm)");
    write_file(path, encode_png(img));
}

LabelMask load_mask(const std::string& path)
{
    auto bytes = read_file(path);
    switch (sniff_format(bytes)) {
    case RasterFormat::png: {
        RawPng raw = read_png(bytes, path);
        const bool palette = raw.color_type == PNG_COLOR_TYPE_PALETTE;
        if (!palette && (raw.color_type & PNG_COLOR_MASK_COLOR))
            fail(Errc::unsupported_format, path + ": label masks must be grayscale or palette PNG");
        LabelMask m(raw.width, raw.height);
        const std::size_t step = std::size_t(raw.channels) * (raw.bit_depth == 16 ? 2 : 1);
        for (std::size_t i = 0; i < m.labels.size(); ++i) {
            const std::uint8_t* px = raw.rows.data() + i * step;
            m.labels[i] = raw.bit_depth == 16 ? std::int32_t(px[0] | (px[1] << 8)) : std::int32_t(px[0]);
        }
        return m;
    }
    case RasterFormat::pnm: {
        RawPnm p = read_pnm(bytes, path);
        if (p.channels != 1) fail(Errc::unsupported_format, path + ": label masks must be single channel");
        LabelMask m(p.width, p.height);
        for (std::size_t i = 0; i < p.samples.size(); ++i) m.labels[i] = std::int32_t(p.samples[i]);
        return m;
    }
    case RasterFormat::jpeg: fail(Errc::unsupported_format, path + ": lossy masks are not supported");
    case RasterFormat::unknown: break;
    }
    fail(Errc::unsupported_format, path + ": unrecognized raster format");
}

void save_mask(const LabelMask& mask, const std::string& path)
{
    validate(mask);
    std::int32_t hi = 0;
    for (auto l : mask.labels) {
        if (l < 0 || l > 65535) fail(Errc::out_of_range, path + ": label outside 0..65535");
        hi = std::max(hi, l);
    }
    std::string ext = lower_ext(path);
    if (ext == ".pgm" || ext == ".pnm") {
        if (hi > 255) fail(Errc::out_of_range, path + ": PGM masks hold labels up to 255");
        std::string head = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
        std::vector<std::uint8_t> out(head.begin(), head.end());
        for (auto l : mask.labels) out.push_back(std::uint8_t(l));
        write_file(path, out);
        return;
    }
    const int depth = hi > 255 ? 16 : 8;
    std::vector<std::uint8_t> rows;
    rows.reserve(mask.labels.size() * std::size_t(depth / 8));
    for (auto l : mask.labels) {
        rows.push_back(std::uint8_t(l & 0xff));
        if (depth == 16) rows.push_back(std::uint8_t(l >> 8));
    }
    std::vector<std::uint8_t> out;
    PngErr err{};
    if (!encode_png_raw(mask.width, mask.height, PNG_COLOR_TYPE_GRAY, depth, rows, out, err))
        fail(Errc::io_error, std::string("png encode failed: ") + err.msg);
    write_file(path, out);
}

} // namespace cuedecomp
