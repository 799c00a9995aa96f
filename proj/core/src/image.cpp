#include "trisdf/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace trisdf {

namespace {

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw RuntimeError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(char((v >> 24) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char(v & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void put_chunk(std::string& out, const char type[4], const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(3) * image.width * image.height)
    throw ContractError("write_png: malformed image");

  const int w = image.width, h = image.height;
  std::vector<unsigned char> raw(static_cast<std::size_t>(h) * (1 + 3 * w));
  std::size_t pos = 0;
  for (int y = 0; y < h; ++y) {
    raw[pos++] = 0;  // filter: none
    for (int x = 0; x < w; ++x) {
      const real* px = image.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const real v = std::clamp(px[c], real(0), real(1));
        raw[pos++] = static_cast<unsigned char>(std::lround(v * 255));
      }
    }
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) !=
      Z_OK)
    throw RuntimeError("write_png: deflate failed");
  compressed.resize(bound);

  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(w));
  put_u32(ihdr, static_cast<std::uint32_t>(h));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace

  std::string out(reinterpret_cast<const char*>(kPngSignature), 8);
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT",
            std::string(reinterpret_cast<const char*>(compressed.data()), compressed.size()));
  put_chunk(out, "IEND", "");
  write_file_atomic(path, out);
}

Image read_png(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 8 || std::memcmp(p, kPngSignature, 8) != 0)
    throw InputError("not a PNG file: " + path.string());

  std::size_t pos = 8;
  int w = 0, h = 0;
  std::string idat;
  while (pos + 12 <= bytes.size()) {
    const std::uint32_t len = get_u32(p + pos);
    const char* type = bytes.data() + pos + 4;
    const unsigned char* data = p + pos + 8;
    if (pos + 12 + len > bytes.size()) throw InputError("truncated PNG: " + path.string());
    if (std::memcmp(type, "IHDR", 4) == 0) {
      w = static_cast<int>(get_u32(data));
      h = static_cast<int>(get_u32(data + 4));
      if (data[8] != 8 || data[9] != 2 || data[12] != 0)
        throw InputError("unsupported PNG variant (need 8-bit RGB, non-interlaced): " +
                         path.string());
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.append(reinterpret_cast<const char*>(data), len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (w <= 0 || h <= 0 || idat.empty()) throw InputError("malformed PNG: " + path.string());

  const std::size_t stride = 1 + static_cast<std::size_t>(3) * w;
  std::vector<unsigned char> raw(stride * h);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_len, reinterpret_cast<const Bytef*>(idat.data()),
                 static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != raw.size())
    throw InputError("PNG inflate failed: " + path.string());

  // undo per-scanline filters
  const int bpp = 3;
  std::vector<unsigned char> prev(static_cast<std::size_t>(3) * w, 0);
  Image image(w, h);
  std::vector<unsigned char> line(static_cast<std::size_t>(3) * w);
  for (int y = 0; y < h; ++y) {
    const unsigned char filter = raw[static_cast<std::size_t>(y) * stride];
    const unsigned char* src = raw.data() + static_cast<std::size_t>(y) * stride + 1;
    for (int i = 0; i < 3 * w; ++i) {
      const int a = i >= bpp ? line[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= bpp ? prev[i - bpp] : 0;
      int value = src[i];
      switch (filter) {
        case 0: break;
        case 1: value += a; break;
        case 2: value += b; break;
        case 3: value += (a + b) / 2; break;
        case 4: value += paeth(a, b, c); break;
        default: throw InputError("unsupported PNG filter: " + path.string());
      }
      line[i] = static_cast<unsigned char>(value & 0xff);
    }
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        image.at(x, y)[c] = real(line[3 * x + c]) / 255;
    prev = line;
  }
  return image;
}

void write_pgm16(const std::filesystem::path& path, const std::vector<real>& values,
                 int width, int height, real scale) {
  if (values.size() != static_cast<std::size_t>(width) * height)
    throw ContractError("write_pgm16: value count mismatch");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) +
                    "\n65535\n";
  for (real v : values) {
    const long q = std::lround(std::clamp(v * scale, real(0), real(65535)));
    out.push_back(char((q >> 8) & 0xff));
    out.push_back(char(q & 0xff));
  }
  write_file_atomic(path, out);
}

real mean_abs_difference(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw ContractError("mean_abs_difference: image size mismatch");
  real acc = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) acc += std::abs(a.pixels[i] - b.pixels[i]);
  return a.pixels.empty() ? 0 : acc / real(a.pixels.size());
}

}  // namespace trisdf
