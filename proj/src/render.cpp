#include "mobilegen/render.hpp"

#include "mobilegen/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

namespace mobilegen {

namespace {

constexpr int kScale = 4;

struct Rgb {
    std::uint8_t r, g, b;
};

// 3x5 bitmaps for 0-9, one row per 3 bits.
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigits = {{
    {7, 5, 5, 5, 7},
    {2, 6, 2, 2, 7},
    {7, 1, 7, 4, 7},
    {7, 1, 7, 1, 7},
    {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7},
    {7, 4, 7, 5, 7},
    {7, 1, 1, 1, 1},
    {7, 5, 7, 5, 7},
    {7, 5, 7, 1, 7},
}};

class Canvas {
public:
    Canvas(int w, int h) : w_(w), h_(h), pixels_(static_cast<std::size_t>(w) * h * 3, 255) {}

    void fill(int x0, int y0, int x1, int y1, Rgb c)
    {
        x0 = std::clamp(x0, 0, w_);
        x1 = std::clamp(x1, 0, w_);
        y0 = std::clamp(y0, 0, h_);
        y1 = std::clamp(y1, 0, h_);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                auto* p = &pixels_[(static_cast<std::size_t>(y) * w_ + x) * 3];
                p[0] = c.r;
                p[1] = c.g;
                p[2] = c.b;
            }
        }
    }

    void outline(int x0, int y0, int x1, int y1, Rgb c)
    {
        fill(x0, y0, x1, y0 + 1, c);
        fill(x0, y1 - 1, x1, y1, c);
        fill(x0, y0, x0 + 1, y1, c);
        fill(x1 - 1, y0, x1, y1, c);
    }

    void number(int x, int y, int value, Rgb c)
    {
        const std::string digits = std::to_string(value);
        for (char d : digits) {
            const auto& glyph = kDigits[static_cast<std::size_t>(d - '0')];
            for (int row = 0; row < 5; ++row) {
                for (int col = 0; col < 3; ++col) {
                    if ((glyph[static_cast<std::size_t>(row)] >> (2 - col)) & 1) {
                        fill(x + col * 2, y + row * 2, x + col * 2 + 2, y + row * 2 + 2, c);
                    }
                }
            }
            x += 8;
        }
    }

    std::string encode() const
    {
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png == nullptr ? nullptr : png_create_info_struct(png);
        if (png == nullptr || info == nullptr) {
            png_destroy_write_struct(&png, nullptr);
            throw Error(ErrorCode::io_error, "libpng initialisation failed");
        }
        std::string out;
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            throw Error(ErrorCode::io_error, "PNG encoding failed");
        }
        png_set_write_fn(
            png, &out,
            [](png_structp p, png_bytep data, png_size_t len) {
                static_cast<std::string*>(png_get_io_ptr(p))->append(reinterpret_cast<const char*>(data), len);
            },
            nullptr);
        png_set_IHDR(png, info, static_cast<png_uint_32>(w_), static_cast<png_uint_32>(h_), 8, PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        // flat placeholder art: fast settings keep batch runs cheap
        png_set_compression_level(png, 1);
        png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
        png_write_info(png, info);
        for (int y = 0; y < h_; ++y) {
            png_write_row(png, const_cast<png_bytep>(&pixels_[static_cast<std::size_t>(y) * w_ * 3]));
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        return out;
    }

private:
    int w_;
    int h_;
    std::vector<std::uint8_t> pixels_;
};

Rgb color_for(const UiElement& e)
{
    if (e.type == "input") {
        return {235, 242, 250};
    }
    if (e.type == "icon") {
        return {220, 235, 220};
    }
    if (e.type == "list") {
        return {245, 240, 225};
    }
    return {228, 228, 228};
}

Canvas draw(const Observation& obs, bool som)
{
    Canvas canvas(std::max(1, obs.width / kScale), std::max(1, obs.height / kScale));
    canvas.fill(0, 0, obs.width / kScale, 60 / kScale, Rgb{60, 60, 60});  // status bar
    for (const auto& e : obs.elements) {
        const int x0 = static_cast<int>(e.bbox.left) / kScale;
        const int y0 = static_cast<int>(e.bbox.top) / kScale;
        const int x1 = static_cast<int>(e.bbox.right) / kScale;
        const int y1 = static_cast<int>(e.bbox.bottom) / kScale;
        canvas.fill(x0, y0, x1, y1, color_for(e));
        canvas.outline(x0, y0, x1, y1, Rgb{150, 150, 150});
        if (som) {
            canvas.outline(x0, y0, x1, y1, Rgb{220, 40, 40});
            const int digits = static_cast<int>(std::to_string(e.index).size());
            canvas.fill(x0, y0, x0 + 2 + digits * 8, y0 + 14, Rgb{220, 40, 40});
            canvas.number(x0 + 2, y0 + 2, e.index, Rgb{255, 255, 255});
        }
    }
    return canvas;
}

}  // namespace

std::string render_screenshot_png(const Observation& obs)
{
    return draw(obs, false).encode();
}

std::string render_som_png(const Observation& obs)
{
    return draw(obs, true).encode();
}

}  // namespace mobilegen
