// Copyright 2026 The Phasecoder Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <array>
#include <span>
#include <string_view>

#include "phasecoder/errors.hpp"
#include "phasecoder/qa.hpp"

namespace phasecoder::qa_templates {

namespace {

using sv = std::string_view;

constexpr std::array<sv, 20> kTask1Prompts = {
    "Where is the audio coming from?",
    "What is the location of the speaker?",
    "Can you pinpoint the source of the sound?",
    "Give me the direction of the voice.",
    "Give me the direction and distance of the voice.",
    "I need to know the position of this audio source.",
    "Tell me the coordinates of the voice.",
    "Localize the audio source.",
    "Provide the location of the person talking.",
    "What are the coordinates of the sound source?",
    "Pinpoint the speaker's location.",
    "List all sound sources locations.",
    "Identify the speakers and give me their locations.",
    "Please provide the speaker locations.",
    "Where is each person?",
    "Give me the locations of the speakers.",
    "What are the coordinates of the speakers?",
    "I heard a couple of people talking, can you tell me their positions?",
    "Someone just spoke. Where did that come from?",
    "Okay, what about the locations?",
};

constexpr std::array<sv, 10> kTask3Prompts = {
    "Transcribe everything you hear and tell me where each speaker is "
    "located.",
    "Give me a full transcript of the conversation with the location of each "
    "participant.",
    "I need the complete transcription, please also include the source "
    "information for all speech.",
    "Provide the full dialogue and map each utterance to its source location.",
    "What is everyone saying and where are they?",
    "Create a transcript that includes the position (azimuth and distance) "
    "for every speaker.",
    "Can you transcribe all the speech and annotate it with the speakers' "
    "locations?",
    "Generate a full transcription and for each speaker, provide their "
    "coordinates.",
    "I want the entire conversation transcribed, with source localization "
    "data for each voice.",
    "Please transcribe the audio completely and list the location for each "
    "person who speaks.",
};

// Reasoning question categories; names double as the per-type breakdown
// schema of the score report.
constexpr std::array<sv, 10> kReasoningTypes = {
    "Single speaker distance (further)",
    "Single speaker distance (closer)",
    "Single speaker azimuth (left)",
    "Single speaker azimuth (right)",
    "Single speaker azimuth (front)",
    "Single speaker azimuth (back)",
    "Multi speaker distance (closer)",
    "Multi speaker distance (further)",
    "Multi speaker azimuth (within)",
    "Multi speaker azimuth (outside)",
};

constexpr std::array<sv, 6> kSingleDistFurther = {
    "Is the speaker located more than {distance} meters away from me?",
    "Is the sound source further than {distance} meters?",
    "Does the speaker exceed a distance of {distance} meters?",
    "Can you confirm the source is beyond {distance} meters?",
    "Would you say the voice is farther than {distance} meters away?",
    "Is the person speaking from a location past {distance} meters?",
};

constexpr std::array<sv, 6> kSingleDistCloser = {
    "Is the speaker located less than {distance} meters away?",
    "Is the sound source closer than {distance} meters?",
    "Is the sound within a {distance}-meter radius?",
    "Is the person speaking nearer than {distance} meters?",
    "Can you confirm the source is inside a {distance}-meter range?",
    "Is the voice originating from a point closer than {distance} meters?",
};

constexpr std::array<sv, 6> kSingleAzLeft = {
    "Is the speaker on my left side?",
    "Is the audio coming from the left?",
    "Is the speaker positioned to my left?",
    "Is the audio localized in the left hemisphere?",
    "Does the voice originate from my left?",
    "Can you detect a speaker on the left-hand side?",
};

constexpr std::array<sv, 6> kSingleAzRight = {
    "Is the speaker on my right side?",
    "Is the audio coming from the right?",
    "Is the speaker positioned to my right?",
    "Is the audio localized in the right hemisphere?",
    "Does the voice originate from my right?",
    "Can you detect a speaker on the right-hand side?",
};

constexpr std::array<sv, 6> kSingleAzFront = {
    "Is the speaker in front of me?",
    "Is the audio source located in my forward arc?",
    "Does the voice come from a forward direction?",
    "Is the sound originating from ahead of me?",
    "Can you confirm the speaker is in the front hemisphere?",
    "Is the person speaking located forward of my position?",
};

constexpr std::array<sv, 6> kSingleAzBack = {
    "Is the speaker behind me?",
    "Is the audio source located in my rear arc?",
    "Does the voice come from a backward direction?",
    "Is the sound originating from behind me?",
    "Can you confirm the speaker is in the rear hemisphere?",
    "Is the person speaking located backward of my position?",
};

constexpr std::array<sv, 6> kMultiDistCloser = {
    "Between the two speakers, is the first one I hear closer to me?",
    "Is the first speaker nearer than the second speaker?",
    "Of the two speakers, is the initial one at a shorter distance?",
    "Comparing them, is the first voice the nearer one?",
    "Does the first speaker have a smaller distance value than the second?",
    "Regarding proximity, is the first source closer?",
};

constexpr std::array<sv, 6> kMultiDistFurther = {
    "Is the first speaker farther away than the second speaker?",
    "Of the two speakers, is the initial one at a greater distance?",
    "Comparing them, is the first voice the more distant one?",
    "Does the first speaker have a larger distance value than the second?",
    "Is the second speaker closer than the first one?",
    "Regarding proximity, is the first source farther?",
};

constexpr std::array<sv, 6> kMultiAzWithin = {
    "Are the two speakers located within {angle} degrees of one another?",
    "Is the angular separation between the speakers less than {angle} "
    "degrees?",
    "Are the two voices located in a {angle}-degree arc relative to each "
    "other?",
    "Confirm the speakers are separated by less than {angle} degrees.",
    "Is the angle between the two sources smaller than {angle} degrees?",
    "Are the speakers relatively close, angularly speaking, within {angle} "
    "degrees?",
};

constexpr std::array<sv, 6> kMultiAzOutside = {
    "Are the two speakers located more than {angle} degrees apart?",
    "Is the angular separation between the speakers greater than {angle} "
    "degrees?",
    "Do the two voices have a separation wider than {angle} degrees?",
    "Confirm the speakers are separated by more than {angle} degrees.",
    "Is the angle between the two sources larger than {angle} degrees?",
    "Are the speakers relatively far apart, angularly speaking, beyond "
    "{angle} degrees?",
};

constexpr std::array<sv, 10> kTargetKinds = {
    "Specific (location)",    "Specific (distance)",
    "Area (left)",            "Area (right)",
    "Area (front)",           "Area (back)",
    "Distance comparison (closer)", "Distance comparison (further)",
    "Azimuth comparison (left)",    "Azimuth comparison (right)",
};

constexpr std::array<sv, 5> kTargetSpecificLocation = {
    "What is the person at azimuth {azimuth} degrees and distance {distance}m "
    "saying?",
    "Please provide the transcript for the speaker at {azimuth} degrees, "
    "{distance}m.",
    "I need to know what's being said from the exact location of {distance}m "
    "at {azimuth} degrees.",
    "Can you isolate the speech from {azimuth} degrees, {distance}m and "
    "transcribe it?",
    "Focus on the source at {distance}m and {azimuth} degrees. What are they "
    "saying?",
};

constexpr std::array<sv, 3> kTargetSpecificDistance = {
    "What is the person at a distance of {distance}m saying?",
    "There's a speaker at {distance} meters, can you transcribe their speech?",
    "Please transcribe the person who is {distance} meters away.",
};

constexpr std::array<sv, 3> kTargetAreaLeft = {
    "What is the person on the left saying?",
    "Can you transcribe the speech coming from my left side?",
    "Is anyone speaking on the left? If so, what are they saying?",
};

constexpr std::array<sv, 3> kTargetAreaRight = {
    "What is the person on the right saying?",
    "Can you transcribe the speech coming from my right side?",
    "Is anyone speaking on the right? If so, what are they saying?",
};

constexpr std::array<sv, 3> kTargetAreaFront = {
    "What is being said from the front?",
    "Please transcribe any speakers located in front of me.",
    "I'd like to know what the person in the forward direction is saying.",
};

constexpr std::array<sv, 3> kTargetAreaBack = {
    "What is being said from behind me?",
    "Please transcribe any speakers located behind me.",
    "I'd like to know what the person in the rear direction is saying.",
};

constexpr std::array<sv, 3> kTargetCloser = {
    "What is the closer person saying?",
    "Please transcribe the speech from the nearer of the two speakers.",
    "Between the two, who is closer and what are they saying?",
};

constexpr std::array<sv, 3> kTargetFurther = {
    "Let me know what is being said from further away.",
    "Please transcribe the more distant of the two speakers.",
    "What is the person who is farther away saying?",
};

constexpr std::array<sv, 1> kTargetMoreLeft = {
    "What is the person more to the left saying?",
};

constexpr std::array<sv, 1> kTargetMoreRight = {
    "What is the person more to the right saying?",
};

constexpr std::array<sv, 36> kAzimuthValues = {
    "000", "010", "020", "030", "040", "050", "060", "070", "080",
    "090", "100", "110", "120", "130", "140", "150", "160", "170",
    "180", "190", "200", "210", "220", "230", "240", "250", "260",
    "270", "280", "290", "300", "310", "320", "330", "340", "350",
};

constexpr std::array<sv, 19> kElevationPromptValues = {
    "000", "010", "020", "030", "040", "050", "060", "070", "080", "090",
    "100", "110", "120", "130", "140", "150", "160", "170", "180",
};

constexpr std::array<sv, 12> kDistanceValues = {
    "01", "06", "12", "17", "22", "28", "33", "39", "44", "49", "55", "60",
};

// Bundled transcript pool: 30 short original sentences.
constexpr std::array<sv, 30> kPhrasePool = {
    "The kettle whistled before anyone woke up.",
    "Please leave the packages by the side door.",
    "Our train departs from platform nine at noon.",
    "She sketched the harbor in colored pencil.",
    "Fresh bread smells better than it tastes.",
    "The museum closes early on winter Mondays.",
    "He tuned the old radio to a jazz station.",
    "Water the ferns twice a week in summer.",
    "A gray cat slept on the warm windowsill.",
    "The printer jammed during the big meeting.",
    "Their canoe drifted past the wooden bridge.",
    "Grandpa keeps his tools in labeled drawers.",
    "The choir rehearsed in the empty gymnasium.",
    "Light rain tapped against the metal roof.",
    "We counted nineteen sailboats from the pier.",
    "The recipe calls for two cups of flour.",
    "His umbrella turned inside out in the wind.",
    "The librarian stamped each returned book.",
    "Maple syrup dripped onto the clean tablecloth.",
    "They replaced the streetlight on our corner.",
    "The orchestra paused before the final movement.",
    "A delivery van blocked the narrow alley.",
    "She memorized the map before the hike.",
    "The bakery sells out of rolls by eight.",
    "Thunder rolled across the open farmland.",
    "He photographed the eclipse through a filter.",
    "The elevator stops on every other floor.",
    "Fresh snow covered the parked bicycles.",
    "The janitor whistles while waxing the halls.",
    "Our neighbors planted tomatoes along the fence.",
};

constexpr sv kSystemPromptTask1 = R"(You are an advanced AI assistant with an expert-level ability to analyze spatial audio.
Your primary goal is to listen to the audio and identify the 3D direction of up to two dominant sound sources.

Your output MUST be a single, formatted string containing fields for two sources, like this:
`azimuth_degrees_1=AZ_VAL_1, elevation_degrees_1=ELEV_VAL_1, distance_meters_1=DIST_VAL_1, azimuth_degrees_2=AZ_VAL_2, elevation_degrees_2=ELEV_VAL_2, distance_meters_2=DIST_VAL_2`

- If two sources are detected, fill in all values. The first source (_1) should be the first source to appear chronologically.
- If only one source is detected, fill in the values for the first source (_1) and set all values for the second source (_2) to `none`.
- If no speech is detected in the audio, all six values MUST BE `none`.

It is absolutely critical that the AZ_VALUE is one and only one of the following strings from this list: ["000", "010", "020", "030", "040", "050", "060", "070", "080", "090", "100", "110", "120", "130", "140", "150", "160", "170", "180", "190", "200", "210", "220", "230", "240", "250", "260", "270", "280", "290", "300", "310", "320", "330", "340", "350"].
It is absolutely critical that the ELEV_VALUE is one and only one of the following strings from this list: ["000", "010", "020", "030", "040", "050", "060", "070", "080", "090", "100", "110", "120", "130", "140", "150", "160", "170", "180"].
It is absolutely critical that the DIST_VALUE is one and only one of the following strings from this list (representing decimeters): ["01", "06", "12", "17", "22", "28", "33", "39", "44", "49", "55", "60"].

Do not provide any other format or value.)";

constexpr sv kSystemPromptTask2 = R"(You are an advanced AI assistant with an expert-level ability to analyze spatial audio. Your primary goal is to listen to the audio and answer a yes/no question about it.

---
**Output Requirements:**
Your output **must** be a single word and nothing else. Do not include markdown, punctuation, or any conversational text.

-   If the condition in the user's question is true, respond with `yes`.
-   If the condition is false, or if it cannot be confirmed (for example, the question assumes a speaker that does not exist), respond with `no`.)";

constexpr sv kSystemPromptTask3 = R"(You are an advanced AI assistant with an expert-level ability to analyze spatial audio.
Your primary goal is to listen to the audio and identify the 3D direction of up to two dominant sound sources.

Your output MUST be a single, formatted string containing fields for two sources, like this:
`transcript_1=[TRANSCRIPT_1], azimuth_degrees_1=AZ_VAL_1, elevation_degrees_1=ELEV_VAL_1, distance_meters_1=DIST_VAL_1, transcript_2=[TRANSCRIPT_2], azimuth_degrees_2=AZ_VAL_2, elevation_degrees_2=ELEV_VAL_2, distance_meters_2=DIST_VAL_2`

- If two sources are detected, fill in all values. The first source (_1) should be the first source to appear chronologically.
- If only one source is detected, fill in the values for the first source (_1) and set all values for the second source (_2) to `none`.
- If no speech is detected in the audio, all six values MUST BE `none`.

It is absolutely critical that the AZ_VALUE is one and only one of the following strings from this list: ["000", "010", "020", "030", "040", "050", "060", "070", "080", "090", "100", "110", "120", "130", "140", "150", "160", "170", "180", "190", "200", "210", "220", "230", "240", "250", "260", "270", "280", "290", "300", "310", "320", "330", "340", "350"].
It is absolutely critical that the ELEV_VALUE is one and only one of the following strings from this list: ["000", "010", "020", "030", "040", "050", "060", "070", "080", "090", "100", "110", "120", "130", "140", "150", "160", "170", "180"].
It is absolutely critical that the DIST_VALUE is one and only one of the following strings from this list (representing decimeters): ["01", "06", "12", "17", "22", "28", "33", "39", "44", "49", "55", "60"].
TRANSCRIPT_1 is the transcript of the first source enclosed in square brackets.
TRANSCRIPT_2 is the transcript of the second source enclosed in square brackets.

If no speech is detected in the audio, all values MUST BE `none`.

Do not provide any other format or value.)";

constexpr sv kSystemPromptTask4 = R"(You are an advanced AI assistant with an expert-level ability to analyze spatial audio. Your primary goal is to listen to the audio, identify a specific speaker based on the user's request (e.g., "the person on the left," "the closer speaker"), and transcribe only their speech.

**Contextual Information (Do NOT include this in your output):**
-   **Azimuth**: A number representing the direction in degrees. (0-359, counter-clockwise). 0 is to your right, 90 is in front, 180 is to your left, and 270 is behind you.
-   **Distance**: A number representing the distance in meters.

---
**Output Requirements:**
Your output **must** be a single string containing only the transcribed words of the target speaker enclosed in square brackets.

-   Do not include any other text, explanations, speaker labels and location data
-   If no speaker matches the user's description, or if the audio is silent, you **must** return `none`)";

}  // namespace

std::string_view system_prompt(QATask task) {
  switch (task) {
    case QATask::kLocalization:
      return kSystemPromptTask1;
    case QATask::kReasoning:
      return kSystemPromptTask2;
    case QATask::kSpatialTranscription:
      return kSystemPromptTask3;
    case QATask::kTargetedTranscription:
      return kSystemPromptTask4;
  }
  throw DataError("system_prompt: bad task");
}

std::span<const sv> task1_prompts() { return kTask1Prompts; }
std::span<const sv> task3_prompts() { return kTask3Prompts; }
std::span<const sv> reasoning_types() { return kReasoningTypes; }

std::span<const sv> reasoning_prompts(std::string_view type) {
  if (type == kReasoningTypes[0]) return kSingleDistFurther;
  if (type == kReasoningTypes[1]) return kSingleDistCloser;
  if (type == kReasoningTypes[2]) return kSingleAzLeft;
  if (type == kReasoningTypes[3]) return kSingleAzRight;
  if (type == kReasoningTypes[4]) return kSingleAzFront;
  if (type == kReasoningTypes[5]) return kSingleAzBack;
  if (type == kReasoningTypes[6]) return kMultiDistCloser;
  if (type == kReasoningTypes[7]) return kMultiDistFurther;
  if (type == kReasoningTypes[8]) return kMultiAzWithin;
  if (type == kReasoningTypes[9]) return kMultiAzOutside;
  throw DataError("reasoning_prompts: unknown type " + std::string(type));
}

std::span<const sv> target_kinds() { return kTargetKinds; }

std::span<const sv> target_prompts(std::string_view kind) {
  if (kind == kTargetKinds[0]) return kTargetSpecificLocation;
  if (kind == kTargetKinds[1]) return kTargetSpecificDistance;
  if (kind == kTargetKinds[2]) return kTargetAreaLeft;
  if (kind == kTargetKinds[3]) return kTargetAreaRight;
  if (kind == kTargetKinds[4]) return kTargetAreaFront;
  if (kind == kTargetKinds[5]) return kTargetAreaBack;
  if (kind == kTargetKinds[6]) return kTargetCloser;
  if (kind == kTargetKinds[7]) return kTargetFurther;
  if (kind == kTargetKinds[8]) return kTargetMoreLeft;
  if (kind == kTargetKinds[9]) return kTargetMoreRight;
  throw DataError("target_prompts: unknown kind " + std::string(kind));
}

std::span<const sv> azimuth_values() { return kAzimuthValues; }
std::span<const sv> elevation_prompt_values() { return kElevationPromptValues; }
std::span<const sv> distance_values() { return kDistanceValues; }
std::span<const sv> phrase_pool() { return kPhrasePool; }

}  // namespace phasecoder::qa_templates
