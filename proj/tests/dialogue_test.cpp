#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "support.hpp"
#include "talechat/dialogue.hpp"

namespace talechat::dialogue {
namespace {

using testing::Harness;

bool contains(const std::string& haystack, std::string_view needle) { return haystack.find(needle) != std::string::npos; }

std::string joined(const Turn& t) {
  std::string out;
  for (const auto& r : t.replies) out += r + "\n";
  return out;
}

std::vector<std::string> ids(const std::vector<retrieval::SearchResult>& r) {
  std::vector<std::string> out;
  for (const auto& x : r) out.push_back(x.id);
  return out;
}

TEST(Dialogue, OpeningGreets) {
  Harness h;
  const auto o = h.manager->open_session(std::nullopt);
  EXPECT_EQ(o.session, "s000001");
  EXPECT_EQ(o.replies, std::vector<std::string>{std::string(kGreeting)});
  EXPECT_FALSE(o.alarm);
  EXPECT_EQ(h.manager->session(o.session).user, "non-registered user");
  EXPECT_EQ(h.manager->open_session(std::nullopt).session, "s000002");
  EXPECT_THROW(h.manager->open_session(std::string("u9999")), std::invalid_argument);
  EXPECT_THROW(h.manager->handle_post("nope", "hi"), UnknownSession);
}

TEST(Dialogue, SearchRefineThenChat) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;

  auto t = h.manager->handle_post(sid, "I want to search for tales on mental illnesses");
  EXPECT_EQ(t.mode, Mode::searching);
  auto first = ids(h.manager->session(sid).last_results);
  std::sort(first.begin(), first.end());
  EXPECT_EQ(first, (std::vector<std::string>{"t02", "t03", "t04"}));
  EXPECT_TRUE(contains(joined(t), "These are the tales I found:"));
  EXPECT_TRUE(contains(joined(t), "The Two Seasons of Leo"));

  t = h.manager->handle_post(sid, "Better only on bipolarity");
  EXPECT_EQ(t.mode, Mode::searching);
  const auto second = ids(h.manager->session(sid).last_results);
  EXPECT_EQ(second, std::vector<std::string>{"t02"});
  for (const auto& id : second) EXPECT_NE(std::find(first.begin(), first.end(), id), first.end());

  t = h.manager->handle_post(sid, "I'm tired of looking for tales, I would like to talk to you about emotions");
  EXPECT_EQ(t.mode, Mode::chatting);
  EXPECT_EQ(t.replies, std::vector<std::string>{std::string(kChatOpening)});
}

TEST(Dialogue, InsomniaChatTurn) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  h.manager->command(sid, "/chat");
  const auto t = h.manager->handle_post(sid, "Tonight I had insomnia");
  ASSERT_EQ(t.replies.size(), 1u);
  const auto& r = t.replies[0];
  EXPECT_TRUE(contains(r, "Do you know that the emotion 'tension' is defined as: 'Feeling of restlessness, discomfort"));
  EXPECT_TRUE(contains(r, "Do you think that your current emotional state is identified with this emotion?"));
  EXPECT_TRUE(contains(r, "An interesting quote to reflect on: '"));
  const auto quotes = h.library.snapshot()->corpus.quotes;
  const auto q01 = std::find_if(quotes.begin(), quotes.end(), [](const Quote& q) { return q.id == "q01"; });
  EXPECT_TRUE(contains(r, q01->text));
  EXPECT_EQ(h.manager->session(sid).detected.at(Emotion::tension), 1u);
}

TEST(Dialogue, NeutralChatPrompts) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  h.manager->command(sid, "/chat");
  const auto t = h.manager->handle_post(sid, "Antonio");
  EXPECT_EQ(t.replies, std::vector<std::string>{std::string(kChatPrompting)});
  EXPECT_TRUE(h.manager->session(sid).detected.empty());
}

TEST(Dialogue, ChatThenRecommendSkipsAgeFlooredTales) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  h.manager->command(sid, "/chat");
  h.manager->handle_post(sid, "Tonight I had insomnia");
  const auto t = h.manager->handle_post(sid, "We've talked enough, please, recommend me a tale");
  EXPECT_EQ(t.mode, Mode::searching);
  EXPECT_TRUE(contains(joined(t), "Based on our conversation, I recommend these tales:"));
  EXPECT_EQ(ids(h.manager->session(sid).last_results), std::vector<std::string>{"t04"});  // t06 needs age 16

  const auto opened = h.manager->handle_post(sid, "1");
  EXPECT_EQ(opened.mode, Mode::reading);
  EXPECT_TRUE(contains(opened.replies.at(0), "Nights Without Sleep"));
}

TEST(Dialogue, RecommendWithoutDetections) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  EXPECT_EQ(h.manager->command(sid, "/recommend").replies, std::vector<std::string>{std::string(kNothingDetected)});
}

TEST(Dialogue, NumericChoiceOutOfRange) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  h.manager->handle_post(sid, "I want to search for tales on mental illnesses");
  const auto t = h.manager->handle_post(sid, "7");
  EXPECT_EQ(t.replies, std::vector<std::string>{"Please type a number between 1 and 3."});
  EXPECT_EQ(t.mode, Mode::searching);
}

TEST(Dialogue, ReadingLoopForTheCakeTale) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  auto t = h.manager->command(sid, "/open t01");
  EXPECT_EQ(t.mode, Mode::reading);
  ASSERT_EQ(t.replies.size(), 2u);
  EXPECT_TRUE(contains(t.replies[0], "The Ingredients of the Cake"));
  EXPECT_TRUE(contains(t.replies[0], "https://tales.example.org/the-ingredients-of-the-cake"));
  EXPECT_EQ(t.replies[1], "Do you think that this tale deals with 'frustration and strength' emotions?");

  t = h.manager->handle_post(sid, "No, I don't think so");
  EXPECT_EQ(t.replies, std::vector<std::string>{std::string(kAskWhichEmotions)});

  t = h.manager->handle_post(sid, "I would say patience");
  EXPECT_EQ(t.replies, (std::vector<std::string>{"Thank you for your answer.",
                                                 "What are your feelings after reading the tale?"}));

  t = h.manager->handle_post(sid, "I felt sadness and sorrow");
  EXPECT_EQ(t.replies, std::vector<std::string>{"I guess that your feelings are related to 'sadness', am I right?"});
  EXPECT_EQ(t.mode, Mode::reading);

  t = h.manager->handle_post(sid, "yes");
  EXPECT_EQ(t.replies.back(), "Who would you recommend this tale to?");

  t = h.manager->handle_post(sid,
                             "To my children, my friends, my family, actually to all the people I know and even more "
                             "so to the people who I consider interested, empathetic and with little sensitivity");
  EXPECT_EQ(t.mode, Mode::reading);
  ASSERT_EQ(t.replies.size(), 1u);
  EXPECT_TRUE(contains(t.replies[0], "Did I understand you correctly?"));

  t = h.manager->handle_post(sid, "yes");
  EXPECT_EQ(t.replies.back(), "Tell me if you would have done the same or something similar?");
  EXPECT_EQ(h.manager->session(sid).session_reads, std::set<std::string>{"t01"});
}

TEST(Dialogue, PositiveClosedAnswerAdvances) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  h.manager->command(sid, "/open t01");
  const auto t = h.manager->handle_post(sid, "Yes, totally");
  ASSERT_EQ(t.replies.size(), 2u);
  EXPECT_EQ(t.replies[1], "What are your feelings after reading the tale?");
}

TEST(Dialogue, SearchIntentInterruptsReading) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  h.manager->command(sid, "/open t03");
  EXPECT_EQ(h.manager->handle_post(sid, "I'd like to select a new tale").mode, Mode::searching);
  h.manager->command(sid, "/open t03");
  EXPECT_EQ(h.manager->handle_post(sid, "I would like to talk to you about emotions").mode, Mode::chatting);
  h.manager->command(sid, "/open t03");
  EXPECT_EQ(h.manager->handle_post(sid, "goodbye").mode, Mode::closed);
}

TEST(Dialogue, EntityAnswerIsChecked) {
  Harness h;
  Session s;
  s.tale = "t05";
  const Question q{QuestionKind::entity,
                   "Who with his face downcast with regret, meets with his friend Marisa in a bar to have a coffee?",
                   FollowupRule::check_entity, "Antonio"};
  EXPECT_EQ(h.manager->answer_followup(s, q, "It was antonio").text, "That's right, it was Antonio.");
  EXPECT_EQ(h.manager->answer_followup(s, q, "Marisa's brother").text, "Not quite, it was Antonio.");
}

TEST(Dialogue, CompareSummaryFallsBackToLeadSentences) {
  Harness h;
  Session s;
  s.tale = "t03";
  const Question q{QuestionKind::open_fixed, "Could you summarize the tale in a few sentences?",
                   FollowupRule::compare_summary, {}};
  const auto r = h.manager->answer_followup(s, q, "A girl gets sad and then better.");
  EXPECT_TRUE(r.awaits_answer);
  EXPECT_EQ(r.text,
            "This is my summary of the tale: 'One morning the fog came into the house and did not leave. It sat at "
            "the table, it lay on the sofa, and it made every colour look grey.'. How does it compare with yours?");
}

TEST(Dialogue, GenerationPromptsDuringReading) {
  auto stub = std::make_shared<testing::RecordingGenerator>("I see empathy and care in your answer, is that so?");
  Harness h(stub);
  Session s;
  s.tale = "t01";
  const Question recommend_q{QuestionKind::open_fixed, "Who would you recommend this tale to?",
                             FollowupRule::active_listening, {}};
  const auto r = h.manager->answer_followup(s, recommend_q, "To my children");
  EXPECT_EQ(r.text, "I see empathy and care in your answer, is that so?");
  EXPECT_EQ(stub->prompts.back(), "Paraphrase the following sentence showing empathy: To my children");

  const Question part_q{QuestionKind::open_fixed, "What part of the tale did you like the most?",
                        FollowupRule::contrast_answer, {}};
  h.manager->answer_followup(s, part_q, "The kitchen");
  EXPECT_EQ(stub->prompts.back().rfind("What part of the tale did you like the most? of this tale in quotes 'Lucía", 0),
            0u);

  const Question sum_q{QuestionKind::open_fixed, "Could you summarize the tale in a few sentences?",
                       FollowupRule::compare_summary, {}};
  h.manager->answer_followup(s, sum_q, "A cake");
  EXPECT_EQ(stub->prompts.back().rfind("Summarize this tale in quotes 'Lucía wanted", 0), 0u);
}

TEST(Dialogue, AddTaleFlowCreatesPendingSubmission) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  auto t = h.manager->handle_post(sid, "I want to add a tale");
  EXPECT_EQ(t.mode, Mode::adding);
  EXPECT_EQ(t.replies, std::vector<std::string>{std::string(kAskTitle)});
  t = h.manager->handle_post(sid, "The Lighthouse");
  EXPECT_EQ(t.replies, std::vector<std::string>{std::string(kAskBody)});
  t = h.manager->handle_post(sid, "A lighthouse keeper learns to ask for help.");
  EXPECT_EQ(t.mode, Mode::idle);
  EXPECT_TRUE(contains(t.replies[0], "'The Lighthouse' will be reviewed"));
  const auto snap = h.library.snapshot();
  EXPECT_EQ(snap->corpus.counts().pending, 1u);
  EXPECT_EQ(snap->corpus.approved_tales().size(), 6u);
}

TEST(Dialogue, ExitClosesSession) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  const auto t = h.manager->handle_post(sid, "goodbye");
  EXPECT_EQ(t.mode, Mode::closed);
  EXPECT_EQ(t.replies, std::vector<std::string>{std::string(kGoodbye)});
  EXPECT_THROW(h.manager->handle_post(sid, "hello"), SessionClosed);
  EXPECT_THROW(h.manager->command(sid, "/chat"), SessionClosed);
}

TEST(Dialogue, UnknownCommandShowsHelp) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  EXPECT_EQ(h.manager->command(sid, "/dance").replies, std::vector<std::string>{std::string(kHelp)});
  EXPECT_EQ(h.manager->command(sid, "/open t99").replies,
            std::vector<std::string>{"Sorry, that tale is not available."});
}

TEST(Dialogue, RegisteredUserEventsReadsAndRisk) {
  Harness h;
  const auto uid = h.users.register_user(15, monitor::Gender::female, true).id;
  auto o = h.manager->open_session(uid);
  EXPECT_FALSE(o.alarm);

  EXPECT_EQ(h.manager->command(o.session, "/open t06").replies,
            std::vector<std::string>{"Sorry, that tale is not suitable for your age. Please choose another one."});
  h.manager->command(o.session, "/open t04");
  EXPECT_EQ(h.users.find(uid)->read_tales, std::set<std::string>{"t04"});
  EXPECT_EQ(h.reads.events().size(), 1u);

  h.manager->command(o.session, "/chat");
  h.manager->handle_post(o.session, "Tonight I had insomnia");
  h.manager->handle_post(o.session, "I'm tired of living");
  const auto rec = h.manager->command(o.session, "/recommend");
  EXPECT_EQ(rec.replies, std::vector<std::string>{std::string(kNothingToRecommend)});  // t04 read, t06 too old

  const auto events = h.events.events();
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.front().emotion, Emotion::tension);
  EXPECT_EQ(events.front().context, monitor::EventContext::detection);
  EXPECT_EQ(events.front().user, uid);

  h.manager->command(o.session, "/exit");
  o = h.manager->open_session(uid);
  ASSERT_TRUE(o.alarm);
  EXPECT_EQ(o.alarm->category, monitor::RiskCategory::suicide_self_harm);
  h.users.acknowledge(uid);
  EXPECT_FALSE(h.manager->open_session(uid).alarm);
}

TEST(Dialogue, UnregisteredUsersLeaveNoEvents) {
  Harness h;
  const auto sid = h.manager->open_session(std::nullopt).session;
  h.manager->command(sid, "/chat");
  h.manager->handle_post(sid, "Tonight I had insomnia");
  h.manager->handle_post(sid, "I'm tired of living");
  EXPECT_EQ(h.events.size(), 0u);
  EXPECT_TRUE(h.users.all().empty());
}

TEST(Dialogue, ConversationLogPairsPromptsWithAnswers) {
  testing::TempDir dir;
  std::filesystem::path file;
  {
    Harness h(nullptr, dir.path());
    const auto sid = h.manager->open_session(std::nullopt).session;
    h.manager->command(sid, "/chat");
    h.manager->handle_post(sid, "Tonight I had insomnia");
    h.manager->handle_post(sid, "goodbye");
    file = dir.path() / monitor::ConversationLog::user_directory("non-registered user");
    ASSERT_TRUE(std::filesystem::is_directory(file));
    file = std::filesystem::directory_iterator(file)->path();
  }
  const auto contents = testing::read_text(file);
  EXPECT_TRUE(contents.ends_with("</conversation>\n"));
  const auto log = monitor::parse_conversation(contents);
  ASSERT_EQ(log.size(), 4u);
  EXPECT_EQ(log[0].prompt, kGreeting);
  EXPECT_EQ(log[0].answer, "/chat");
  EXPECT_EQ(log[1].prompt, kChatOpening);
  EXPECT_EQ(log[1].answer, "Tonight I had insomnia");
  EXPECT_EQ(log[2].answer, "goodbye");
  EXPECT_EQ(log[3].prompt, kGoodbye);
  EXPECT_EQ(log[3].answer, "");
  EXPECT_EQ(log[0].date, make_instant(2023, 5, 25, 14, 41, 0));
}

std::vector<std::string> run_script(Harness& h) {
  std::vector<std::string> out;
  const auto sid = h.manager->open_session(std::nullopt).session;
  for (const auto* line : {"I want to search for tales on mental illnesses", "Better only on bipolarity", "1",
                           "no", "fear", "I felt sadness and sorrow", "yes",
                           "I'm tired of looking for tales, I would like to talk to you about emotions",
                           "Tonight I had insomnia", "recommend me a tale", "goodbye"}) {
    for (auto& r : h.manager->handle_post(sid, line).replies) out.push_back(std::move(r));
  }
  return out;
}

TEST(Dialogue, ScriptedSessionsAreDeterministic) {
  Harness a, b;
  EXPECT_EQ(run_script(a), run_script(b));
}

TEST(Dialogue, DistinctSessionsRunConcurrently) {
  Harness h;
  std::vector<std::string> sids;
  for (int i = 0; i < 8; ++i) sids.push_back(h.manager->open_session(std::nullopt).session);
  std::vector<std::thread> threads;
  for (const auto& sid : sids) {
    threads.emplace_back([&h, sid] {
      for (int k = 0; k < 20; ++k) {
        h.manager->command(sid, "/chat");
        h.manager->handle_post(sid, "Tonight I had insomnia");
        h.manager->handle_post(sid, "I want to search for tales on mental illnesses");
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& sid : sids) {
    const auto s = h.manager->session(sid);
    EXPECT_EQ(s.transcript.size(), 60u);
    EXPECT_EQ(s.mode, Mode::searching);
  }
}

// Randomized corpora, read sets, ages and detections.
TEST(Recommendation, SafetyOverRandomSessions) {
  std::mt19937 rng(500);
  std::uniform_int_distribution<std::size_t> emo(0, 29), small(0, 4), tales_n(3, 15), count(1, 3);
  std::uniform_int_distribution<int> age(5, 30), floor(0, 3);
  for (int round = 0; round < 500; ++round) {
    Corpus corpus;
    for (std::size_t i = tales_n(rng); i > 0; --i) {
      Tale t;
      t.id = "r" + std::to_string(i);
      t.status = small(rng) == 0 ? TaleStatus::pending : TaleStatus::approved;
      for (std::size_t k = 1 + small(rng); k > 0; --k) t.emotions.insert(all_emotions()[emo(rng)]);
      if (int f = floor(rng); f > 0) t.min_age = f * 6;
      corpus.tales.push_back(std::move(t));
    }
    std::map<Emotion, std::size_t> detected;
    for (std::size_t k = small(rng); k > 0; --k) detected[all_emotions()[emo(rng)]] += count(rng);
    std::set<std::string> read;
    for (const auto& t : corpus.tales) {
      if (small(rng) < 2) read.insert(t.id);
    }
    const std::optional<int> user_age = small(rng) == 0 ? std::nullopt : std::optional<int>(age(rng));

    const auto recs = recommend_tales(corpus, detected, read, user_age);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& r = recs[i];
      const auto* t = corpus.find_tale(r.tale);
      ASSERT_NE(t, nullptr);
      EXPECT_EQ(t->status, TaleStatus::approved);
      EXPECT_FALSE(read.count(r.tale));
      if (t->min_age) {
        ASSERT_TRUE(user_age);
        EXPECT_GE(*user_age, *t->min_age);
      }
      bool shares = false;
      for (auto e : t->emotions) shares = shares || (detected.count(e) && detected.at(e) > 0);
      EXPECT_TRUE(shares);
      if (i > 0) {
        EXPECT_TRUE(recs[i - 1].score > r.score || (recs[i - 1].score == r.score && recs[i - 1].tale < r.tale));
      }
    }
  }
}

}  // namespace
}  // namespace talechat::dialogue
