#include "xmodal/pairkit.hpp"

#include <cmath>

#include "xmodal/error.hpp"

namespace xmodal::pairkit {

const char* speaker_name(Speaker s) {
  switch (s) {
    case Speaker::adult_female: return "adult_female";
    case Speaker::adult_male: return "adult_male";
    case Speaker::key_child: return "key_child";
    case Speaker::other_child: return "other_child";
  }
  return "unknown";
}

Speaker parse_speaker(std::string_view name) {
  if (name == "adult_female") return Speaker::adult_female;
  if (name == "adult_male") return Speaker::adult_male;
  if (name == "key_child") return Speaker::key_child;
  if (name == "other_child") return Speaker::other_child;
  fail(errc::malformed_record, "unknown speaker label '" + std::string(name) + "'");
}

double mean_word_confidence(const UtteranceRecord& rec) {
  if (rec.words.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [token, conf] : rec.words) total += conf;
  return total / static_cast<double>(rec.words.size());
}

std::vector<UtteranceRecord> filter_utterances(std::span<const UtteranceRecord> records,
                                               double min_confidence,
                                               const std::set<Speaker>& drop_speakers) {
  if (min_confidence < 0.0 || min_confidence > 1.0)
    fail(errc::config_invalid, "min_confidence must lie in [0,1]");
  std::vector<UtteranceRecord> kept;
  for (const auto& rec : records) {
    if (rec.t_end < rec.t_start)
      fail(errc::negative_duration, "utterance '" + rec.utt_id + "' has t_end < t_start");
    if (mean_word_confidence(rec) < min_confidence) continue;
    if (rec.speaker && drop_speakers.count(*rec.speaker)) continue;
    kept.push_back(rec);
  }
  return kept;
}

FrameSchedule frame_schedule(double t_start, double t_end, double fps, int max_frames) {
  if (t_end < t_start) fail(errc::negative_duration, "frame schedule with t_end < t_start");
  if (fps <= 0.0) fail(errc::config_invalid, "fps must be > 0");
  if (max_frames < 1) fail(errc::config_invalid, "max_frames must be >= 1");

  const double span = t_end - t_start;
  long long n = std::llround(span * fps);
  if (n < 1) n = 1;
  if (n > max_frames) n = max_frames;

  FrameSchedule schedule;
  schedule.max_frames = max_frames;
  if (n == 1) {
    schedule.timestamps.push_back(t_start + span / 2.0);
    return schedule;
  }
  schedule.timestamps.reserve(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k)
    schedule.timestamps.push_back(t_start + span * static_cast<double>(k) / static_cast<double>(n - 1));
  return schedule;
}

ClipWindow clip_window(double t_start, double t_end, double video_duration) {
  if (!(t_start >= 0.0 && t_start <= t_end && t_end <= video_duration))
    fail(errc::invalid_bounds, "clip bounds must satisfy 0 <= t_start <= t_end <= video_duration");

  constexpr double kMinClip = 0.3;
  constexpr double kMaxClip = 60.0;

  ClipWindow window;
  window.t_start = t_start;
  window.t_end = t_end;

  const double duration = t_end - t_start;
  if (duration < kMinClip) {
    // symmetric extension about the midpoint; overflow past a video edge is
    // handed to the other side so only videos shorter than 0.3s stay short
    const double mid = 0.5 * (t_start + t_end);
    double lo = mid - kMinClip / 2.0;
    double hi = mid + kMinClip / 2.0;
    if (lo < 0.0) {
      hi += -lo;
      lo = 0.0;
    }
    if (hi > video_duration) {
      lo -= hi - video_duration;
      hi = video_duration;
    }
    window.t_start = std::max(lo, 0.0);
    window.t_end = hi;
  } else if (duration > kMaxClip) {
    window.t_end = t_start + kMaxClip;
  }
  return window;
}

CorpusStats corpus_stats(std::span<const UtteranceRecord> records, double video_hours) {
  if (records.empty()) fail(errc::empty_corpus, "corpus stats over zero utterances");
  if (video_hours <= 0.0) fail(errc::config_invalid, "video_hours must be > 0");

  double speech_seconds = 0.0;
  std::size_t total_words = 0;
  for (const auto& rec : records) {
    if (rec.t_end < rec.t_start)
      fail(errc::negative_duration, "utterance '" + rec.utt_id + "' has t_end < t_start");
    speech_seconds += rec.t_end - rec.t_start;
    total_words += rec.words.size();
  }

  CorpusStats stats;
  stats.speech_hours = speech_seconds / 3600.0;
  stats.coverage_ratio = stats.speech_hours / video_hours;
  stats.avg_utterance_words = static_cast<double>(total_words) / static_cast<double>(records.size());
  return stats;
}

}  // namespace xmodal::pairkit
