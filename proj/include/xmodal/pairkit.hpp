#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace xmodal::pairkit {

enum class Speaker { adult_female, adult_male, key_child, other_child };

const char* speaker_name(Speaker s);
Speaker parse_speaker(std::string_view name);

struct UtteranceRecord {
  std::string utt_id;
  std::string group_id;  // source video
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<std::pair<std::string, double>> words;  // (token, confidence in [0,1])
  std::optional<Speaker> speaker;
};

double mean_word_confidence(const UtteranceRecord& rec);  // 0 when there are no words

// Keeps records whose mean word confidence reaches `min_confidence` and whose
// speaker label is not in `drop_speakers` (unlabeled records always pass the
// speaker filter). Input order is preserved.
std::vector<UtteranceRecord> filter_utterances(std::span<const UtteranceRecord> records,
                                               double min_confidence,
                                               const std::set<Speaker>& drop_speakers);

struct FrameSchedule {
  std::string utt_id;
  std::vector<double> timestamps;
  int max_frames = 32;
};

// n = clamp(round((t_end-t_start)*fps), 1, max_frames) timestamps, evenly
// spaced over [t_start, t_end] inclusive; a single frame sits at the midpoint.
FrameSchedule frame_schedule(double t_start, double t_end, double fps = 1.0, int max_frames = 32);

struct ClipWindow {
  std::string utt_id;
  double t_start = 0.0;
  double t_end = 0.0;
};

// Clips shorter than 0.3s are extended symmetrically about their midpoint
// (overflow at a video edge is given to the other side); clips longer than
// 60s are truncated to [t_start, t_start+60]. Both stay inside [0, video].
ClipWindow clip_window(double t_start, double t_end, double video_duration);

struct CorpusStats {
  double speech_hours = 0.0;
  double coverage_ratio = 0.0;       // speech_hours / video_hours
  double avg_utterance_words = 0.0;
};

CorpusStats corpus_stats(std::span<const UtteranceRecord> records, double video_hours);

}  // namespace xmodal::pairkit
