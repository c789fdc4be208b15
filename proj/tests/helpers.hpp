#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "scriptdrift/image.hpp"

namespace fs = std::filesystem;

// Fresh scratch directory per test case.
inline fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("scriptdrift-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline scriptdrift::LineImage random_image(std::mt19937_64& rng, int w, int h) {
  scriptdrift::LineImage img(w, h);
  std::uniform_int_distribution<int> px(0, 255);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(px(rng));
  return img;
}
