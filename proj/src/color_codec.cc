/*
 * Copyright 2026 The RPRR Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rprr/color_codec.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>

#include "range_coder.h"
#include "rprr/errors.h"
#include "rprr/wire.h"

namespace rprr {
namespace {

constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 7;
constexpr int kCodeBlock = 32;
constexpr int kMaxPlanes = 30;
constexpr std::int32_t kCoefficientLimit = 1 << 24;

enum BandType { kLL = 0, kHL = 1, kLH = 2, kHH = 3 };

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<std::int32_t> v;

  Plane(int width, int height)
      : w(width), h(height), v(static_cast<std::size_t>(width) * height, 0) {}
  std::int32_t& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
};

struct Band {
  int x0, y0, w, h;
  int level;
  BandType type;
};

int RoundUp8(int n) { return (n + 7) / 8 * 8; }

int ChooseLevels(int w, int h) {
  const int bits = static_cast<int>(std::bit_width(static_cast<unsigned>(std::min(w, h))));
  return std::min(kMaxWaveletLevels, bits - 1);
}

// Region sizes per level: sizes[0] is the full plane.
std::vector<std::array<int, 2>> LevelSizes(int w, int h, int levels) {
  std::vector<std::array<int, 2>> s{{w, h}};
  for (int l = 0; l < levels; ++l) {
    s.push_back({(s.back()[0] + 1) / 2, (s.back()[1] + 1) / 2});
  }
  return s;
}

// Section 0 holds the coarsest approximation; section s the details of
// level levels - s + 1.
std::vector<std::vector<Band>> Sections(int w, int h, int levels) {
  const auto s = LevelSizes(w, h, levels);
  std::vector<std::vector<Band>> out;
  out.push_back({Band{0, 0, s[levels][0], s[levels][1], levels, kLL}});
  for (int l = levels; l >= 1; --l) {
    const int W = s[l - 1][0], H = s[l - 1][1];
    const int lw = s[l][0], lh = s[l][1];
    out.push_back({Band{lw, 0, W - lw, lh, l, kHL}, Band{0, lh, lw, H - lh, l, kLH},
                   Band{lw, lh, W - lw, H - lh, l, kHH}});
  }
  return out;
}

// 5/3 lifting with symmetric extension; output is [lowpass | highpass].
template <typename T, typename Lift>
void Forward1D(T* x, int n, int stride, std::vector<T>& tmp, Lift lift) {
  if (n < 2) return;
  const int ns = (n + 1) / 2, nd = n / 2;
  tmp.resize(n);
  T* s = tmp.data();
  T* d = tmp.data() + ns;
  auto X = [&](int k) { return x[static_cast<std::ptrdiff_t>(k) * stride]; };
  for (int i = 0; i < nd; ++i) {
    const int right = 2 * i + 2 < n ? 2 * i + 2 : 2 * i;
    d[i] = X(2 * i + 1) - lift.Predict(X(2 * i), X(right));
  }
  for (int i = 0; i < ns; ++i) {
    const T dl = d[i > 0 ? i - 1 : 0];
    const T dr = d[i < nd ? i : nd - 1];
    s[i] = X(2 * i) + lift.Update(dl, dr);
  }
  for (int k = 0; k < n; ++k) x[static_cast<std::ptrdiff_t>(k) * stride] = tmp[k];
}

template <typename T, typename Lift>
void Inverse1D(T* x, int n, int stride, std::vector<T>& tmp, Lift lift) {
  if (n < 2) return;
  const int ns = (n + 1) / 2, nd = n / 2;
  tmp.resize(n);
  for (int k = 0; k < n; ++k) tmp[k] = x[static_cast<std::ptrdiff_t>(k) * stride];
  const T* s = tmp.data();
  const T* d = tmp.data() + ns;
  auto X = [&](int k) -> T& { return x[static_cast<std::ptrdiff_t>(k) * stride]; };
  for (int i = 0; i < ns; ++i) {
    const T dl = d[i > 0 ? i - 1 : 0];
    const T dr = d[i < nd ? i : nd - 1];
    X(2 * i) = s[i] - lift.Update(dl, dr);
  }
  for (int i = 0; i < nd; ++i) {
    const int right = 2 * i + 2 < n ? 2 * i + 2 : 2 * i;
    X(2 * i + 1) = d[i] + lift.Predict(X(2 * i), X(right));
  }
}

struct IntegerLift {
  std::int32_t Predict(std::int32_t a, std::int32_t b) const { return (a + b) >> 1; }
  std::int32_t Update(std::int32_t a, std::int32_t b) const { return (a + b + 2) >> 2; }
};

struct RealLift {
  double Predict(double a, double b) const { return (a + b) / 2; }
  double Update(double a, double b) const { return (a + b) / 4; }
};

void ForwardDwt(Plane& p, int levels) {
  const auto sizes = LevelSizes(p.w, p.h, levels);
  std::vector<std::int32_t> tmp;
  for (int l = 0; l < levels; ++l) {
    const int W = sizes[l][0], H = sizes[l][1];
    for (int y = 0; y < H; ++y) Forward1D(&p.at(0, y), W, 1, tmp, IntegerLift{});
    for (int x = 0; x < W; ++x) Forward1D(&p.at(x, 0), H, p.w, tmp, IntegerLift{});
  }
}

void InverseDwt(Plane& p, int levels) {
  const auto sizes = LevelSizes(p.w, p.h, levels);
  std::vector<std::int32_t> tmp;
  for (int l = levels - 1; l >= 0; --l) {
    const int W = sizes[l][0], H = sizes[l][1];
    for (int x = 0; x < W; ++x) Inverse1D(&p.at(x, 0), H, p.w, tmp, IntegerLift{});
    for (int y = 0; y < H; ++y) Inverse1D(&p.at(0, y), W, 1, tmp, IntegerLift{});
  }
}

// Marks the coefficients that the inverse transform reads when it rebuilds
// the pixels set in `need` (size w x h), level by level, and zeroes every
// other detail coefficient.
void ZeroUnneeded(Plane& p, int levels, std::vector<std::uint8_t> need) {
  const auto sizes = LevelSizes(p.w, p.h, levels);
  for (int l = 0; l < levels; ++l) {
    const int W = sizes[l][0], H = sizes[l][1];
    const int sx = sizes[l + 1][0], sy = sizes[l + 1][1];
    const int dx = W - sx, dy = H - sy;
    std::vector<std::uint8_t> coeff(static_cast<std::size_t>(W) * H, 0);
    auto span_of = [](int v, int ns, int nd, int& s0, int& s1, int& d0, int& d1) {
      const int c = v / 2;
      s0 = std::max(0, c - 1);
      s1 = std::min(ns - 1, c + 1);
      d0 = std::max(0, c - 1);
      d1 = std::min(nd - 1, c + 1);
    };
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        if (!need[static_cast<std::size_t>(y) * W + x]) continue;
        int xs0, xs1, xd0, xd1, ys0, ys1, yd0, yd1;
        span_of(x, sx, dx, xs0, xs1, xd0, xd1);
        span_of(y, sy, dy, ys0, ys1, yd0, yd1);
        auto mark = [&](int x0, int x1, int y0, int y1) {
          for (int cy = y0; cy <= y1; ++cy) {
            for (int cx = x0; cx <= x1; ++cx) coeff[static_cast<std::size_t>(cy) * W + cx] = 1;
          }
        };
        mark(xs0, xs1, ys0, ys1);
        mark(sx + xd0, sx + xd1, ys0, ys1);
        mark(xs0, xs1, sy + yd0, sy + yd1);
        mark(sx + xd0, sx + xd1, sy + yd0, sy + yd1);
      }
    }
    need.assign(static_cast<std::size_t>(sx) * sy, 0);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const bool keep = coeff[static_cast<std::size_t>(y) * W + x] != 0;
        if (x < sx && y < sy) {
          need[static_cast<std::size_t>(y) * sx + x] = keep;
        } else if (!keep) {
          p.at(x, y) = 0;
        }
      }
    }
  }
}

// Energy of the 1-D synthesis response to a unit coefficient at `level`.
double SynthesisGain(int level, bool high) {
  constexpr int kLength = 1024;
  const auto sizes = LevelSizes(kLength, kLength, level);
  std::vector<double> x(kLength, 0.0), tmp;
  const int m = sizes[level - 1][0];
  const int low = sizes[level][0];
  x[high ? low + (m - low) / 2 : low / 2] = 1.0;
  for (int l = level - 1; l >= 0; --l) {
    Inverse1D(x.data(), sizes[l][0], 1, tmp, RealLift{});
  }
  double e = 0;
  for (double v : x) e += v * v;
  return e;
}

double BandStep(const Band& b, int quality) {
  if (b.type == kLL || quality >= kMaxColorQuality) return 1.0;
  const double gain = SynthesisGain(b.level, b.type != kLH) *
                      SynthesisGain(b.level, b.type != kHL);
  return std::max(1.0, QualityStep(quality) / std::sqrt(gain));
}

std::int32_t Quantize(std::int32_t c, double step) {
  if (step == 1.0) return c;
  const auto m = static_cast<std::int32_t>(std::floor(std::abs(c) / step));
  return c < 0 ? -m : m;
}

std::int32_t Dequantize(std::int32_t q, double step) {
  std::int64_t v = q;
  if (step != 1.0 && q != 0) {
    const auto m = static_cast<std::int64_t>(std::lround((std::abs(q) + 0.5) * step));
    v = q < 0 ? -m : m;
  }
  return static_cast<std::int32_t>(
      std::clamp<std::int64_t>(v, -kCoefficientLimit, kCoefficientLimit));
}

struct Models {
  // [luma/chroma][band type]
  std::array<std::array<std::array<BitModel, 32>, 4>, 2> planes;
  std::array<std::array<std::array<BitModel, 4>, 4>, 2> significance;
  std::array<BitModel, 2> sign;
  std::array<std::array<BitModel, 2>, 2> refinement;
};

int NeighborContext(const std::vector<std::uint8_t>& state, int bw, int bh,
                    int x, int y) {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int nx = x + dx, ny = y + dy;
      if ((dx || dy) && nx >= 0 && ny >= 0 && nx < bw && ny < bh &&
          state[ny * bw + nx] != 0) {
        ++n;
      }
    }
  }
  return std::min(n, 3);
}

template <typename Coder, typename Block>
void ForEachCodeBlock(const Band& b, Coder&& coder, Block&& block) {
  for (int y0 = 0; y0 < b.h; y0 += kCodeBlock) {
    for (int x0 = 0; x0 < b.w; x0 += kCodeBlock) {
      block(coder, b.x0 + x0, b.y0 + y0, std::min(kCodeBlock, b.w - x0),
            std::min(kCodeBlock, b.h - y0));
    }
  }
}

void EncodeBlock(RangeEncoder& rc, Models& m, Plane& q, int cls, BandType type,
                 int x0, int y0, int bw, int bh) {
  std::uint32_t peak = 0;
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      peak = std::max(peak, static_cast<std::uint32_t>(std::abs(q.at(x0 + x, y0 + y))));
    }
  }
  const int planes = static_cast<int>(std::bit_width(peak));
  int node = 1;
  for (int b = 4; b >= 0; --b) {
    const int bit = (planes >> b) & 1;
    rc.Encode(m.planes[cls][type][node], bit);
    node = 2 * node + bit;
  }
  std::vector<std::uint8_t> state(static_cast<std::size_t>(bw) * bh, 0);
  for (int p = planes - 1; p >= 0; --p) {
    for (int y = 0; y < bh; ++y) {
      for (int x = 0; x < bw; ++x) {
        const std::int32_t c = q.at(x0 + x, y0 + y);
        const int bit = static_cast<int>((static_cast<std::uint32_t>(std::abs(c)) >> p) & 1u);
        std::uint8_t& s = state[y * bw + x];
        if (s == 0) {
          rc.Encode(m.significance[cls][type][NeighborContext(state, bw, bh, x, y)], bit);
          if (bit) {
            rc.Encode(m.sign[cls], c < 0);
            s = 1;
          }
        } else {
          rc.Encode(m.refinement[cls][s - 1], bit);
          s = 2;
        }
      }
    }
  }
}

void DecodeBlock(RangeDecoder& rc, Models& m, Plane& q, int cls, BandType type,
                 int x0, int y0, int bw, int bh) {
  int node = 1;
  for (int b = 4; b >= 0; --b) node = 2 * node + rc.Decode(m.planes[cls][type][node]);
  const int planes = node - 32;
  if (planes > kMaxPlanes) throw DecodeError("bit-plane count out of range", 0);
  std::vector<std::uint8_t> state(static_cast<std::size_t>(bw) * bh, 0);
  std::vector<std::uint32_t> mag(state.size(), 0);
  std::vector<std::uint8_t> negative(state.size(), 0);
  for (int p = planes - 1; p >= 0; --p) {
    for (int y = 0; y < bh; ++y) {
      for (int x = 0; x < bw; ++x) {
        const std::size_t k = static_cast<std::size_t>(y) * bw + x;
        if (state[k] == 0) {
          if (rc.Decode(m.significance[cls][type][NeighborContext(state, bw, bh, x, y)])) {
            negative[k] = static_cast<std::uint8_t>(rc.Decode(m.sign[cls]));
            mag[k] = 1u << p;
            state[k] = 1;
          }
        } else {
          mag[k] |= static_cast<std::uint32_t>(rc.Decode(m.refinement[cls][state[k] - 1])) << p;
          state[k] = 2;
        }
      }
    }
  }
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * bw + x;
      const auto v = static_cast<std::int32_t>(mag[k]);
      q.at(x0 + x, y0 + y) = negative[k] ? -v : v;
    }
  }
}

std::array<Plane, 3> ForwardColorTransform(const ColorImage& img, int pw, int ph) {
  std::array<Plane, 3> out{Plane(pw, ph), Plane(pw, ph), Plane(pw, ph)};
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      const Rgb c = img.at(std::min(x, img.width() - 1), std::min(y, img.height() - 1));
      const int r = c[0], g = c[1], b = c[2];
      out[0].at(x, y) = ((r + 2 * g + b) >> 2) - 128;
      out[1].at(x, y) = b - g;
      out[2].at(x, y) = r - g;
    }
  }
  return out;
}

std::uint8_t Clamp8(std::int32_t v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

}  // namespace

double QualityStep(int quality) {
  if (quality >= kMaxColorQuality) return 1.0;
  return std::pow(2.0, (kMaxColorQuality - quality) / 16.0);
}

std::vector<std::uint8_t> EncodeColor(const ColorImage& image, int quality,
                                      std::span<const std::uint8_t> roi) {
  if (image.empty()) throw ValidationError("cannot encode an empty image");
  if (image.width() > 0xffff || image.height() > 0xffff) {
    throw ValidationError("image too large for the color stream");
  }
  if (quality < 0 || quality > kMaxColorQuality) {
    throw ValidationError("color quality must be within 0..100");
  }
  const std::size_t pixels = static_cast<std::size_t>(image.width()) * image.height();
  if (!roi.empty() && roi.size() != pixels) {
    throw ValidationError("region mask does not match the image size");
  }
  const int pw = RoundUp8(image.width()), ph = RoundUp8(image.height());
  const int levels = ChooseLevels(pw, ph);
  auto planes = ForwardColorTransform(image, pw, ph);
  const auto sections = Sections(pw, ph, levels);
  std::vector<std::uint8_t> need;
  if (!roi.empty()) {
    need.assign(static_cast<std::size_t>(pw) * ph, 0);
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        need[static_cast<std::size_t>(y) * pw + x] =
            roi[static_cast<std::size_t>(y) * image.width() + x] != 0;
      }
    }
  }
  for (Plane& p : planes) {
    ForwardDwt(p, levels);
    if (!need.empty()) ZeroUnneeded(p, levels, need);
    for (const auto& section : sections) {
      for (const Band& b : section) {
        const double step = BandStep(b, quality);
        for (int y = 0; y < b.h; ++y) {
          for (int x = 0; x < b.w; ++x) {
            std::int32_t& c = p.at(b.x0 + x, b.y0 + y);
            c = Quantize(c, step);
          }
        }
      }
    }
  }

  ByteWriter out;
  out.U8(kVersion);
  out.U8(static_cast<std::uint8_t>(quality));
  out.U8(static_cast<std::uint8_t>(levels));
  out.U16(static_cast<std::uint16_t>(image.width()));
  out.U16(static_cast<std::uint16_t>(image.height()));
  for (const auto& section : sections) {
    RangeEncoder rc;
    Models models;
    for (int c = 0; c < 3; ++c) {
      const int cls = c == 0 ? 0 : 1;
      for (const Band& b : section) {
        ForEachCodeBlock(b, rc, [&](RangeEncoder& coder, int x0, int y0, int bw, int bh) {
          EncodeBlock(coder, models, planes[c], cls, b.type, x0, y0, bw, bh);
        });
      }
    }
    const std::vector<std::uint8_t> bytes = rc.Finish();
    out.U32(static_cast<std::uint32_t>(bytes.size()));
    out.Bytes(bytes);
  }
  return out.Take();
}

ColorStreamInfo InspectColor(std::span<const std::uint8_t> bits) {
  if (bits.size() < kHeaderBytes) {
    throw DecodeError("color stream header truncated", bits.size());
  }
  ByteReader in(bits);
  ColorStreamInfo info;
  if (in.U8() != kVersion) throw DecodeError("unsupported color stream version", 0);
  info.quality = in.U8();
  info.levels = in.U8();
  info.width = in.U16();
  info.height = in.U16();
  info.header_bytes = kHeaderBytes;
  if (info.quality > kMaxColorQuality) throw DecodeError("color quality out of range", 1);
  if (info.width == 0 || info.height == 0) throw DecodeError("empty color image", 3);
  if (info.levels != ChooseLevels(RoundUp8(info.width), RoundUp8(info.height))) {
    throw DecodeError("wavelet level count does not match the image size", 2);
  }
  std::size_t pos = kHeaderBytes;
  for (int s = 0; s <= info.levels; ++s) {
    if (pos + 4 > bits.size()) break;
    std::uint32_t len = 0;
    for (int b = 0; b < 4; ++b) len |= static_cast<std::uint32_t>(bits[pos + b]) << (8 * b);
    if (pos + 4 + len > bits.size()) break;
    pos += 4 + len;
    info.section_ends.push_back(pos);
  }
  return info;
}

ColorImage DecodeColor(std::span<const std::uint8_t> bits,
                       std::optional<std::size_t> max_bytes) {
  const ColorStreamInfo info = InspectColor(bits);
  const std::size_t sections_total = static_cast<std::size_t>(info.levels) + 1;
  std::size_t limit = bits.size();
  if (max_bytes) {
    if (*max_bytes < info.header_bytes) {
      throw DecodeError("prefix shorter than the color header", *max_bytes);
    }
    limit = std::min(limit, *max_bytes);
  } else {
    if (info.section_ends.size() != sections_total) {
      const std::size_t at = info.section_ends.empty() ? info.header_bytes : info.section_ends.back();
      throw DecodeError("color section truncated", at);
    }
    if (info.section_ends.back() != bits.size()) {
      throw DecodeError("trailing bytes after the color stream", info.section_ends.back());
    }
  }

  const int pw = RoundUp8(info.width), ph = RoundUp8(info.height);
  const auto sections = Sections(pw, ph, info.levels);
  std::array<Plane, 3> planes{Plane(pw, ph), Plane(pw, ph), Plane(pw, ph)};
  std::size_t start = info.header_bytes;
  for (std::size_t s = 0; s < info.section_ends.size(); ++s) {
    const std::size_t end = info.section_ends[s];
    if (end > limit) break;
    try {
      RangeDecoder rc(bits.subspan(start + 4, end - start - 4));
      Models models;
      for (int c = 0; c < 3; ++c) {
        const int cls = c == 0 ? 0 : 1;
        for (const Band& b : sections[s]) {
          ForEachCodeBlock(b, rc, [&](RangeDecoder& coder, int x0, int y0, int bw, int bh) {
            DecodeBlock(coder, models, planes[c], cls, b.type, x0, y0, bw, bh);
          });
        }
      }
    } catch (const DecodeError& e) {
      throw DecodeError("corrupt color section", start);
    }
    start = end;
  }

  for (Plane& p : planes) {
    for (const auto& section : sections) {
      for (const Band& b : section) {
        const double step = BandStep(b, info.quality);
        for (int y = 0; y < b.h; ++y) {
          for (int x = 0; x < b.w; ++x) {
            std::int32_t& c = p.at(b.x0 + x, b.y0 + y);
            c = Dequantize(c, step);
          }
        }
      }
    }
    InverseDwt(p, info.levels);
  }

  ColorImage out(info.width, info.height);
  for (int y = 0; y < info.height; ++y) {
    for (int x = 0; x < info.width; ++x) {
      const std::int32_t yy = planes[0].at(x, y) + 128;
      const std::int32_t cb = planes[1].at(x, y), cr = planes[2].at(x, y);
      const std::int32_t g = yy - ((cb + cr) >> 2);
      out.set(x, y, {Clamp8(cr + g), Clamp8(g), Clamp8(cb + g)});
    }
  }
  return out;
}

ColorImage PayloadCanvas(std::span<const PayloadBlock> blocks, int width,
                         int height) {
  using Sample = std::array<double, 4>;  // r, g, b, weight
  std::vector<std::vector<Sample>> pyramid;
  std::vector<std::array<int, 2>> sizes{{width, height}};
  pyramid.emplace_back(static_cast<std::size_t>(width) * height, Sample{});
  for (const PayloadBlock& b : blocks) {
    for (int y = 0; y < kBlockSize; ++y) {
      for (int x = 0; x < kBlockSize; ++x) {
        const int i = b.coord.bx * kBlockSize + x, j = b.coord.by * kBlockSize + y;
        if (i >= width || j >= height) continue;
        const Rgb& c = b.color[y * kBlockSize + x];
        pyramid[0][static_cast<std::size_t>(j) * width + i] = {
            double(c[0]), double(c[1]), double(c[2]), 1.0};
      }
    }
  }
  // Push: weighted 2x2 sums up to a single pixel.
  while (sizes.back()[0] > 1 || sizes.back()[1] > 1) {
    const auto [w, h] = sizes.back();
    const int nw = (w + 1) / 2, nh = (h + 1) / 2;
    std::vector<Sample> next(static_cast<std::size_t>(nw) * nh, Sample{});
    const auto& fine = pyramid.back();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Sample& s = fine[static_cast<std::size_t>(y) * w + x];
        Sample& t = next[static_cast<std::size_t>(y / 2) * nw + x / 2];
        for (int k = 0; k < 4; ++k) t[k] += s[k];
      }
    }
    pyramid.push_back(std::move(next));
    sizes.push_back({nw, nh});
  }
  // Normalize to colors; weight becomes a known flag.
  for (auto& level : pyramid) {
    for (Sample& s : level) {
      if (s[3] > 0) {
        for (int k = 0; k < 3; ++k) s[k] /= s[3];
        s[3] = 1;
      }
    }
  }
  if (pyramid.back()[0][3] == 0) pyramid.back()[0] = {128, 128, 128, 1};
  // Pull: unknown pixels take the bilinear upsample of the coarser level.
  for (int l = static_cast<int>(pyramid.size()) - 2; l >= 0; --l) {
    const auto [w, h] = sizes[l];
    const auto [cw, ch] = sizes[l + 1];
    const auto& coarse = pyramid[l + 1];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Sample& s = pyramid[l][static_cast<std::size_t>(y) * w + x];
        if (s[3] > 0) continue;
        const double fx = std::clamp((x + 0.5) / 2 - 0.5, 0.0, cw - 1.0);
        const double fy = std::clamp((y + 0.5) / 2 - 0.5, 0.0, ch - 1.0);
        const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
        const int x1 = std::min(x0 + 1, cw - 1), y1 = std::min(y0 + 1, ch - 1);
        const double ax = fx - x0, ay = fy - y0;
        auto at = [&](int cx, int cy) { return coarse[static_cast<std::size_t>(cy) * cw + cx]; };
        for (int k = 0; k < 3; ++k) {
          s[k] = (1 - ay) * ((1 - ax) * at(x0, y0)[k] + ax * at(x1, y0)[k]) +
                 ay * ((1 - ax) * at(x0, y1)[k] + ax * at(x1, y1)[k]);
        }
        s[3] = 1;
      }
    }
  }
  ColorImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Sample& s = pyramid[0][static_cast<std::size_t>(y) * width + x];
      out.set(x, y, {Clamp8(static_cast<std::int32_t>(std::lround(s[0]))),
                     Clamp8(static_cast<std::int32_t>(std::lround(s[1]))),
                     Clamp8(static_cast<std::int32_t>(std::lround(s[2])))});
    }
  }
  return out;
}

void ExtractPayloadColor(const ColorImage& canvas,
                         std::span<PayloadBlock> blocks) {
  for (PayloadBlock& b : blocks) {
    for (int y = 0; y < kBlockSize; ++y) {
      for (int x = 0; x < kBlockSize; ++x) {
        const int i = b.coord.bx * kBlockSize + x, j = b.coord.by * kBlockSize + y;
        b.color[y * kBlockSize + x] = canvas.contains(i, j) ? canvas.at(i, j) : Rgb{0, 0, 0};
      }
    }
  }
}

std::vector<std::uint8_t> PayloadMask(std::span<const PayloadBlock> blocks,
                                      int width, int height) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(width) * height, 0);
  for (const PayloadBlock& b : blocks) {
    for (int y = 0; y < kBlockSize; ++y) {
      const int j = b.coord.by * kBlockSize + y;
      for (int x = 0; x < kBlockSize; ++x) {
        const int i = b.coord.bx * kBlockSize + x;
        if (i < width && j < height) mask[static_cast<std::size_t>(j) * width + i] = 1;
      }
    }
  }
  return mask;
}

}  // namespace rprr
