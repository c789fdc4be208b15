#include <doctest.h>

#include "helpers.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/image.hpp"
#include "scriptdrift/util.hpp"

using namespace scriptdrift;

TEST_CASE("png and pgm round-trip") {
  const auto dir = scratch("image");
  std::mt19937_64 rng(3);
  const auto img = random_image(rng, 37, 11);
  write_image(dir / "a.png", img);
  write_image(dir / "a.pgm", img);
  CHECK(read_image(dir / "a.png") == img);
  CHECK(read_image(dir / "a.pgm") == img);
  CHECK_THROWS_AS(read_image(dir / "missing.png"), Error);
}

TEST_CASE("utf8 and crc32") {
  const std::string s = "h\xc3\xa9llo \xe2\x82\xac";
  CHECK(utf8_encode(utf8_decode(s)) == s);
  CHECK(utf8_decode(s).size() == 7);
  const std::string check = "123456789";
  CHECK(crc32(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(check.data()), check.size())) ==
        0xCBF43926u);
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, std::uint64_t{0}) != derive_seed(1, std::uint64_t{1}));
}
