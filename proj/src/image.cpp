#include "journeybench/image.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

namespace jb {

void Image::snap_to_u8() {
  for (float& v : pix) v = float(to_u8(v)) / 255.0f;
}

namespace {

void put_u32be(std::string& out, uint32_t v) {
  out.push_back(char((v >> 24) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char(v & 0xff));
}

uint32_t get_u32be(const unsigned char* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void append_chunk(std::string& out, const char type[4], const std::string& data) {
  put_u32be(out, uint32_t(data.size()));
  size_t crc_start = out.size();
  out.append(type, 4);
  out.append(data);
  uint32_t crc = uint32_t(
      crc32(0, reinterpret_cast<const Bytef*>(out.data() + crc_start), uInt(out.size() - crc_start)));
  put_u32be(out, crc);
}

const unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
  require(img.width > 0 && img.height > 0, ErrorKind::InvalidArgument, "empty image");
  std::string raw;
  raw.reserve(size_t(img.height) * (img.width + 1));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back('\0');  // filter type 0
    for (int x = 0; x < img.width; ++x) raw.push_back(char(to_u8(img.at(x, y))));
  }

  uLongf bound = compressBound(uLong(raw.size()));
  std::string compressed(bound, '\0');
  int rc = compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                     reinterpret_cast<const Bytef*>(raw.data()), uLong(raw.size()), 6);
  require(rc == Z_OK, ErrorKind::IoError, "zlib compress failed for " + path);
  compressed.resize(bound);

  std::string ihdr;
  put_u32be(ihdr, uint32_t(img.width));
  put_u32be(ihdr, uint32_t(img.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace

  std::string out(reinterpret_cast<const char*>(kPngSig), 8);
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", compressed);
  append_chunk(out, "IEND", "");

  std::ofstream f(path, std::ios::binary);
  require(bool(f), ErrorKind::IoError, "cannot open for write: " + path);
  f.write(out.data(), std::streamsize(out.size()));
  require(bool(f), ErrorKind::IoError, "short write: " + path);
}

Image read_png(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(bool(f), ErrorKind::IoError, "cannot open: " + path);
  std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  require(blob.size() >= 8 && std::memcmp(p, kPngSig, 8) == 0, ErrorKind::IoError,
          "not a PNG: " + path);

  size_t pos = 8;
  int width = 0, height = 0, bit_depth = 0, color_type = -1;
  std::string idat;
  while (pos + 8 <= blob.size()) {
    uint32_t len = get_u32be(p + pos);
    require(pos + 12 + len <= blob.size(), ErrorKind::IoError, "truncated PNG: " + path);
    std::string type(blob, pos + 4, 4);
    const unsigned char* data = p + pos + 8;
    if (type == "IHDR") {
      width = int(get_u32be(data));
      height = int(get_u32be(data + 4));
      bit_depth = data[8];
      color_type = data[9];
    } else if (type == "IDAT") {
      idat.append(reinterpret_cast<const char*>(data), len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  require(width > 0 && height > 0, ErrorKind::IoError, "missing IHDR: " + path);
  require(bit_depth == 8 && color_type == 0, ErrorKind::IoError,
          "unsupported PNG format (want 8-bit grayscale): " + path);

  size_t raw_size = size_t(height) * (width + 1);
  std::vector<unsigned char> raw(raw_size);
  uLongf out_len = uLongf(raw_size);
  int rc = uncompress(raw.data(), &out_len, reinterpret_cast<const Bytef*>(idat.data()),
                      uLong(idat.size()));
  require(rc == Z_OK && out_len == raw_size, ErrorKind::IoError, "PNG inflate failed: " + path);

  Image img(width, height);
  std::vector<unsigned char> prev(size_t(width), 0), cur(size_t(width), 0);
  for (int y = 0; y < height; ++y) {
    const unsigned char* row = raw.data() + size_t(y) * (width + 1);
    int filter = row[0];
    for (int x = 0; x < width; ++x) {
      int v = row[1 + x];
      int a = x > 0 ? cur[x - 1] : 0;
      int b = prev[x];
      int c = x > 0 ? prev[x - 1] : 0;
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: fail(ErrorKind::IoError, "bad PNG filter byte: " + path);
      }
      cur[x] = uint8_t(v & 0xff);
      img.at(x, y) = float(cur[x]) / 255.0f;
    }
    std::swap(prev, cur);
  }
  return img;
}

Image downsample2x(const Image& img) {
  int w = (img.width + 1) / 2, h = (img.height + 1) / 2;
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          int sx = 2 * x + dx, sy = 2 * y + dy;
          if (sx < img.width && sy < img.height) {
            sum += img.at(sx, sy);
            ++n;
          }
        }
      }
      out.at(x, y) = float(sum / n);
    }
  }
  return out;
}

Image hflip(const Image& img) {
  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(img.width - 1 - x, y);
  return out;
}

Image crop_resize(const Image& img, double x0, double y0, double cw, double ch) {
  require(cw > 0 && ch > 0, ErrorKind::InvalidArgument, "crop window must be positive");
  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // Map output pixel center into the crop window.
      double sx = x0 + (x + 0.5) / img.width * cw - 0.5;
      double sy = y0 + (y + 0.5) / img.height * ch - 0.5;
      int ix = int(std::floor(sx)), iy = int(std::floor(sy));
      double fx = sx - ix, fy = sy - iy;
      auto sample = [&](int px, int py) -> double {
        px = px < 0 ? 0 : (px >= img.width ? img.width - 1 : px);
        py = py < 0 ? 0 : (py >= img.height ? img.height - 1 : py);
        return img.at(px, py);
      };
      double v = (1 - fx) * (1 - fy) * sample(ix, iy) + fx * (1 - fy) * sample(ix + 1, iy) +
                 (1 - fx) * fy * sample(ix, iy + 1) + fx * fy * sample(ix + 1, iy + 1);
      out.at(x, y) = float(v);
    }
  }
  return out;
}

double mean_abs_diff(const Image& a, const Image& b) {
  require(a.same_shape(b), ErrorKind::InvalidArgument, "shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.pix.size(); ++i) s += std::abs(double(a.pix[i]) - double(b.pix[i]));
  return s / double(a.pix.size());
}

double max_abs_diff(const Image& a, const Image& b) {
  require(a.same_shape(b), ErrorKind::InvalidArgument, "shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.pix.size(); ++i)
    m = std::max(m, std::abs(double(a.pix[i]) - double(b.pix[i])));
  return m;
}

double psnr(const Image& a, const Image& b) {
  require(a.same_shape(b), ErrorKind::InvalidArgument, "shape mismatch");
  double mse = 0.0;
  for (size_t i = 0; i < a.pix.size(); ++i) {
    double d = double(a.pix[i]) - double(b.pix[i]);
    mse += d * d;
  }
  mse /= double(a.pix.size());
  if (mse <= 0.0) return 99.0;
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace jb
