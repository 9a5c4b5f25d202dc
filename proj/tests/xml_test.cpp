#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "talechat/monitor.hpp"
#include "talechat/xml.hpp"

namespace talechat {
namespace {

using monitor::Interaction;

TEST(Xml, EscapesPredefinedEntities) {
  EXPECT_EQ(xml::escape("a<b>&\"c'\r"), "a&lt;b&gt;&amp;&quot;c&apos;&#13;");
  EXPECT_EQ(xml::escape("plain"), "plain");
}

TEST(Xml, ParseErrorCarriesFileAndLine) {
  try {
    xml::parse("<a>\n<b>\n</a>", "broken.xml");
    FAIL() << "expected a parse error";
  } catch (const xml::ParseError& e) {
    EXPECT_EQ(e.file(), "broken.xml");
    EXPECT_GT(e.line(), 0);
    EXPECT_EQ(std::string(e.what()).rfind("broken.xml:", 0), 0u);
  }
}

TEST(Xml, AtomicWriteReplacesContents) {
  testing::TempDir dir;
  const auto file = dir / "x.txt";
  xml::write_file_atomically(file, "one");
  xml::write_file_atomically(file, "two");
  EXPECT_EQ(testing::read_text(file), "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(InteractionXml, ExemplarIsByteExact) {
  const Interaction i{make_instant(2023, 5, 25, 14, 41, 0), "atg9",
                      "Tell me if you would have done the same or something similar",
                      "Yes, sometimes in some circumstances it is difficult for me to ignore harmful comments"};
  EXPECT_EQ(serialize_interaction(i),
            "<interaction><date>25/05/2023 14:41:00</date><user>atg9</user><CuentosIE>Tell me if you would have "
            "done the same or something similar</CuentosIE><answer>Yes, sometimes in some circumstances it is "
            "difficult for me to ignore harmful comments</answer></interaction>");
}

std::string random_text(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {"a", "Z", " ", "  ", "\n", "\t", "\r", "\r\n", "<", ">", "&",
                                                  "\"", "'", "é", "ñ", "\xE2\x80\xA6", "]]>", "&amp;", "<!--", "9"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), len(0, 25);
  std::string s;
  for (std::size_t n = len(rng); n > 0; --n) s += pieces[pick(rng)];
  return s;
}

TEST(InteractionXml, RandomInteractionsRoundTrip) {
  std::mt19937 rng(2023);
  std::uniform_int_distribution<long long> secs(0, 4'000'000'000LL);
  std::vector<Interaction> written;
  std::string doc = monitor::conversation_header("u<1>", "s&1");
  for (int i = 0; i < 1000; ++i) {
    auto user = random_text(rng);
    if (user.empty()) user = "u";
    written.push_back({Instant{std::chrono::seconds{secs(rng)}}, user, random_text(rng), random_text(rng)});
    doc += serialize_interaction(written.back()) + "\n";
  }
  doc += monitor::kConversationFooter;
  EXPECT_EQ(monitor::parse_conversation(doc), written);
}

TEST(ConversationLog, WritesHeaderInteractionsAndFooter) {
  testing::TempDir dir;
  std::filesystem::path path;
  {
    monitor::ConversationLog log(dir.path(), "atg9", "s000001");
    log.append({make_instant(2023, 5, 25, 14, 41, 0), "atg9", "Q?", "A"});
    path = log.path();
    EXPECT_EQ(monitor::parse_conversation(testing::read_text(path)).size(), 1u);  // still open
    log.close();
    EXPECT_THROW(log.append({}), std::logic_error);
  }
  const auto contents = testing::read_text(path);
  EXPECT_EQ(contents, monitor::conversation_header("atg9", "s000001") +
                          "<interaction><date>25/05/2023 14:41:00</date><user>atg9</user><CuentosIE>Q?</CuentosIE>"
                          "<answer>A</answer></interaction>\n" +
                          std::string(monitor::kConversationFooter));
}

TEST(ConversationLog, UserDirectoryIsFilesystemSafe) {
  const auto d = monitor::ConversationLog::user_directory("non-registered user");
  EXPECT_EQ(d.find('/'), std::string::npos);
  EXPECT_EQ(d.find(' '), std::string::npos);
  EXPECT_NE(monitor::ConversationLog::user_directory("../x"), "..");
}

}  // namespace
}  // namespace talechat
