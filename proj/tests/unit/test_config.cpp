#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "navstack/camera_api.hpp"
#include "navstack/config.hpp"
#include "navstack/vsn_core.hpp"

using namespace navstack;

namespace {

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse accepts comments, blanks, and key/value lines") {
  const ConfigFile cfg = ConfigFile::parse(
      "# launcher settings\n"
      "\n"
      "robot.rate_hz: 50   # trailing comment\n"
      "  camera.n_rays :  180\n"
      "vsn.target: chair\n");
  CHECK(cfg.has("robot.rate_hz"));
  CHECK(cfg.get_string("robot.rate_hz", "") == "50");
  CHECK(cfg.get_int("camera.n_rays", 0) == 180);
  CHECK(cfg.get_string("vsn.target", "") == "chair");
  CHECK(cfg.values().size() == 3);
  CHECK(cfg.remaps().empty());
}

TEST_CASE("remap lines collect in order and demand two tokens") {
  const ConfigFile cfg = ConfigFile::parse(
      "remap: /a /b\n"
      "remap: /b /c\n");
  REQUIRE(cfg.remaps().size() == 2);
  CHECK(cfg.remaps()[0].first == "/a");
  CHECK(cfg.remaps()[0].second == "/b");
  CHECK(cfg.remaps()[1].first == "/b");
  CHECK(cfg.remaps()[1].second == "/c");

  CHECK(message_of([] { ConfigFile::parse("remap: /only_one\n"); }) ==
        "config line 1: remap wants exactly '<from> <to>'");
  CHECK(message_of([] { ConfigFile::parse("remap: /a /b /c\n"); }) ==
        "config line 1: remap wants exactly '<from> <to>'");
}

TEST_CASE("parse rejects malformed lines with the offending line number") {
  CHECK(message_of([] { ConfigFile::parse("ok: 1\nno colon here\n"); }) ==
        "config line 2: missing ':'");
  CHECK(message_of([] { ConfigFile::parse(": orphan value\n"); }) ==
        "config line 1: empty key");
  CHECK(message_of([] { ConfigFile::parse("dangling:\n"); }) ==
        "config line 1: empty value for 'dangling'");
  CHECK(message_of([] { ConfigFile::parse("dangling:   # comment only\n"); }) ==
        "config line 1: empty value for 'dangling'");
}

TEST_CASE("getters fall back when the key is absent") {
  const ConfigFile cfg = ConfigFile::parse("a: 1\n");
  CHECK(cfg.get_string("missing", "dflt") == "dflt");
  CHECK(cfg.get_double("missing", 2.5) == doctest::Approx(2.5));
  CHECK(cfg.get_int("missing", 7) == 7);
  CHECK(cfg.get_bool("missing", true) == true);
}

TEST_CASE("numeric getters demand a fully numeric token") {
  const ConfigFile cfg = ConfigFile::parse(
      "f: 0.25\n"
      "i: -3\n"
      "junk: 1.5cm\n"
      "word: fast\n");
  CHECK(cfg.get_double("f", 0.0) == doctest::Approx(0.25));
  CHECK(cfg.get_int("i", 0) == -3);
  CHECK(message_of([&] { cfg.get_double("junk", 0.0); }) ==
        "config key 'junk': '1.5cm' is not a number");
  CHECK(message_of([&] { cfg.get_double("word", 0.0); }) ==
        "config key 'word': 'fast' is not a number");
  CHECK(message_of([&] { cfg.get_int("f", 0); }) ==
        "config key 'f': '0.25' is not an integer");
}

TEST_CASE("booleans accept the usual spellings and nothing else") {
  const ConfigFile cfg = ConfigFile::parse(
      "t1: true\nt2: 1\nt3: yes\nf1: false\nf2: 0\nf3: no\nbad: on\n");
  CHECK(cfg.get_bool("t1", false));
  CHECK(cfg.get_bool("t2", false));
  CHECK(cfg.get_bool("t3", false));
  CHECK_FALSE(cfg.get_bool("f1", true));
  CHECK_FALSE(cfg.get_bool("f2", true));
  CHECK_FALSE(cfg.get_bool("f3", true));
  CHECK(message_of([&] { cfg.get_bool("bad", false); }) ==
        "config key 'bad': 'on' is not a boolean");
}

TEST_CASE("load reads a file and tags errors with the path") {
  const std::string good = "/tmp/navstack_cfg_good.txt";
  {
    std::ofstream out(good);
    out << "robot.rate_hz: 25\nremap: /x /y\n";
  }
  const ConfigFile cfg = ConfigFile::load(good);
  CHECK(cfg.get_int("robot.rate_hz", 0) == 25);
  REQUIRE(cfg.remaps().size() == 1);
  std::remove(good.c_str());

  const std::string bad = "/tmp/navstack_cfg_bad.txt";
  {
    std::ofstream out(bad);
    out << "broken line\n";
  }
  CHECK(message_of([&] { ConfigFile::load(bad); }) ==
        "config line 1: missing ':' [" + bad + "]");
  std::remove(bad.c_str());

  CHECK(message_of([] { ConfigFile::load("/tmp/definitely_absent.cfg"); }) ==
        "cannot open config file '/tmp/definitely_absent.cfg'");
}

TEST_CASE("vsn config keeps its defaults and rejects even median windows") {
  const VsnConfig dflt = vsn_config_from(ConfigFile::parse(""));
  CHECK(dflt.median_window == 5);
  CHECK(dflt.max_steps == 150);

  const VsnConfig cfg = vsn_config_from(
      ConfigFile::parse("vsn.median_window: 3\nvsn.max_steps: 25\n"));
  CHECK(cfg.median_window == 3);
  CHECK(cfg.max_steps == 25);

  CHECK(message_of([] {
          vsn_config_from(ConfigFile::parse("vsn.median_window: 4\n"));
        }) == "vsn.median_window must be odd, got 4");
}

TEST_CASE("camera config validates its geometry") {
  const CameraConfig dflt = camera_config_from(ConfigFile::parse(""));
  CHECK(dflt.geom.fov_deg == doctest::Approx(90.0));
  CHECK(dflt.geom.n_rays == 180);
  CHECK(dflt.geom.max_range == doctest::Approx(5.0));

  CHECK(message_of([] {
          camera_config_from(ConfigFile::parse("camera.fov_deg: 400\n"));
        }) == "camera config: fov_deg must be in (0, 360]");
  CHECK(message_of([] {
          camera_config_from(ConfigFile::parse("camera.n_rays: 0\n"));
        }) == "camera config: n_rays must be at least 1");
  CHECK(message_of([] {
          camera_config_from(ConfigFile::parse("camera.max_range_m: -1\n"));
        }) == "camera config: max_range_m must be positive");
}
