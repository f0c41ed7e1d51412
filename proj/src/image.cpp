#include "ddkl/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ddkl {

namespace {

void skip_pnm_whitespace(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_pnm_int(std::istream& in) {
  skip_pnm_whitespace(in);
  int v = 0;
  if (!(in >> v)) throw std::runtime_error("pnm: malformed header");
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw std::runtime_error("raw f32: truncated file");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

unsigned char quantize_8bit(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(clamped * 255.0));
}

Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pnm: cannot open " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || (m1 != '5' && m1 != '6')) {
    throw std::runtime_error("pnm: unsupported magic in " + path);
  }
  const int channels = (m1 == '6') ? 3 : 1;
  const int w = read_pnm_int(in);
  const int h = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (w < 1 || h < 1 || maxval != 255) throw std::runtime_error("pnm: bad dimensions or maxval");
  in.get();  // single whitespace after maxval
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw std::runtime_error("pnm: truncated pixel data");
  Image img(w, h, channels);
  // interleaved on disk, channel-major in memory
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(c, y, x) = raw[(static_cast<size_t>(y) * w + x) * channels + c] / 255.0;
      }
    }
  }
  return img;
}

void write_pnm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pnm: cannot open " + path + " for writing");
  if (img.channels != 1 && img.channels != 3) {
    throw std::runtime_error("pnm: only 1 or 3 channels supported");
  }
  out << (img.channels == 3 ? "P6" : "P5") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(static_cast<size_t>(img.width) * img.height * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        raw[(static_cast<size_t>(y) * img.width + x) * img.channels + c] =
            quantize_8bit(img.at(c, y, x));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

Image read_raw_f32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("raw f32: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "DDKF", 4) != 0) {
    throw std::runtime_error("raw f32: bad magic in " + path);
  }
  const auto w = read_le<uint32_t>(in);
  const auto h = read_le<uint32_t>(in);
  const auto c = read_le<uint32_t>(in);
  if (w == 0 || h == 0 || c == 0 || w > (1u << 20) || h > (1u << 20) || c > 1024) {
    throw std::runtime_error("raw f32: implausible dimensions");
  }
  Image img(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  for (double& v : img.data) v = static_cast<double>(read_le<float>(in));
  return img;
}

void write_raw_f32(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("raw f32: cannot open " + path + " for writing");
  out.write("DDKF", 4);
  write_le<uint32_t>(out, static_cast<uint32_t>(img.width));
  write_le<uint32_t>(out, static_cast<uint32_t>(img.height));
  write_le<uint32_t>(out, static_cast<uint32_t>(img.channels));
  for (double v : img.data) write_le<float>(out, static_cast<float>(v));
}

}  // namespace ddkl
