#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "wsnake/storage.hpp"

namespace fs = std::filesystem;
using namespace wsnake;

namespace {

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(WSNAKE_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::string out;
  char buf[4096];
  while (const auto n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("wsnake-cli-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("database lifecycle: register, handshake, change password") {
  TempDir d;
  const auto db = "--db " + d / "gw.db";
  const auto card = d / "alice.card";
  REQUIRE(cli("--seed 7 --curve toy register-user " + db + " --id alice --password pw1 --card " + card).code == 0);
  CHECK(cli("register-sensor " + db + " --sid s1").code == 1);  // not provisioned yet
  REQUIRE(cli("register-sensor " + db + " --sid s1 --provision").code == 0);
  REQUIRE(cli("register-sensor " + db + " --sid s1 --sensor-file " + d / "s1.key").code == 0);

  const auto hs = "handshake " + db + " --id alice --card " + card + " --sid s1";
  const auto ok = cli("--seed 9 " + hs + " --password pw1 --format json");
  REQUIRE(ok.code == 0);
  const auto j = nlohmann::json::parse(ok.out);
  CHECK(j["agreed"] == true);
  CHECK(j["ops"]["user"]["formula"] == "3T_h + 2T_ecc + 2T_sym");
  CHECK(j["ops"]["gateway"]["formula"] == "4T_h + 3T_ecc + 2T_sym");
  CHECK(j["ops"]["sensor"]["formula"] == "3T_h + 2T_ecc");
  CHECK(j["sk_fingerprints"]["user"] == j["sk_fingerprints"]["sensor"]);
  CHECK(cli("--seed 9 " + hs + " --password pw1 --sensor-file " + d / "s1.key").code == 0);

  const auto bad = cli("--seed 9 " + hs + " --password wrong");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("login-failed") != std::string::npos);

  const auto pc = "change-password " + db + " --id alice --card " + card;
  CHECK(cli("--seed 3 " + pc + " --password wrong --new-password pw2").code == 1);
  REQUIRE(cli("--seed 3 " + pc + " --password pw1 --new-password pw2").code == 0);
  CHECK(cli("--seed 9 " + hs + " --password pw2").code == 0);
  CHECK(cli("--seed 9 " + hs + " --password pw1").code == 1);

  CHECK(cli("--curve p256 " + hs + " --password pw2").code == 1);  // curve mismatch with the database
}

TEST_CASE("output never carries raw secrets") {
  TempDir d;
  const auto db = "--db " + d / "gw.db";
  const auto card = d / "c";
  std::string all;
  auto run = [&](const std::string& a) {
    const auto r = cli(a);
    REQUIRE(r.code == 0);
    all += r.out;
  };
  run("--seed 1 register-user " + db + " --id alice --password pw --card " + card);
  run("register-sensor " + db + " --sid s1 --provision");
  run("register-sensor " + db + " --sid s1");
  run("--seed 2 handshake " + db + " --id alice --password pw --card " + card + " --sid s1 --format json");
  run("--seed 2 handshake " + db + " --id alice --password pw --card " + card + " --sid s1");

  const auto gw = storage::parse_gateway(storage::read_file(d / "gw.db"));
  const auto c = storage::parse_card(storage::read_file(card));
  std::vector<std::string> secrets{to_hex(gw.secret().encode(gw.suite().ec())), c.c.hex(), c.d.hex(), c.z.hex(),
                                   c.q.hex()};
  for (const auto& [id, rec] : gw.users()) secrets.push_back(rec.b.hex());
  for (const auto& [sid, as] : gw.sensors()) secrets.push_back(as.hex());
  for (const auto& s : secrets) {
    CHECK(all.find(s) == std::string::npos);
    CHECK(all.find(s.substr(0, 16)) == std::string::npos);
  }
}

TEST_CASE("a held database lock makes a second writer fail") {
  TempDir d;
  const auto db = d / "gw.db";
  REQUIRE(cli("--seed 1 register-user --db " + db + " --id a --password p --card " + d / "c").code == 0);
  {
    storage::FileLock lock(db);
    const auto r = cli("--seed 1 register-user --db " + db + " --id b --password p --card " + d / "c2");
    CHECK(r.code == 1);
    CHECK(r.out.find("error") != std::string::npos);
  }
  CHECK(cli("--seed 1 register-user --db " + db + " --id b --password p --card " + d / "c2").code == 0);
}

TEST_CASE("analysis commands: deterministic output and exit codes") {
  for (const auto* args : {"attack replay-m1-late", "attack dos-garbage-m1 --format json", "analyze pfs",
                           "handshake --seed 4", "cost-report", "list-scenarios"}) {
    CAPTURE(args);
    const auto a = cli(args);
    const auto b = cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
  const auto fast = cli("--replay-cache off attack replay-m1-fast");
  CHECK(fast.code == 2);
  CHECK(fast.out.find("DIVERGENCE") != std::string::npos);
  CHECK(cli("--replay-cache on attack replay-m1-fast").code == 0);

  const auto sv = cli("analyze stolen-verifier");
  CHECK(sv.code == 2);
  CHECK(sv.out.find("DIVERGENCE") != std::string::npos);
  CHECK(sv.out.find("attacker holds the sensor's key: yes") != std::string::npos);

  CHECK(cli("analyze s-z-compromise").code == 0);
  CHECK(cli("attack no-such-attack").code == 1);
  CHECK(cli("analyze no-such-scenario").code == 1);
  CHECK(cli("--th 0 cost-report").code == 1);
  CHECK(cli("--format xml list-scenarios").code != 0);

  const auto totals = nlohmann::json::parse(cli("cost-report --format json").out);
  CHECK(totals["measured_matches_claimed"] == true);
}
