"""Prompt templates and the scene/dialogue renderings they embed.

Scene lines always take the form ``Episode E Scene S [<Tag> ...]: narration``
so replies can be checked against what was shown.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

from dramacut.core import DialogueLine, Scene

HIGHLIGHT_TAG = "<Highlight>"
START_TAG = "<Optional Start>"
END_TAG = "<Optional End>"
HIGHLIGHT_SCENE_TAG = "<Highlight Scene>"
GENERAL_SCENE_TAG = "<General Scene>"
NONE_BLOCK = "(none)"


def scene_line(scene: Scene, tags: Sequence[str] = ()) -> str:
    label = f"Episode {scene.episode_id} Scene {scene.scene_id}"
    if tags:
        label += " " + " ".join(tags)
    return f"{label}: {scene.narration.strip()}"


def format_ms(ms: int) -> str:
    return f"{ms // 3_600_000:02d}:{ms // 60_000 % 60:02d}:{ms // 1000 % 60:02d}.{ms % 1000:03d}"


def dialogue_line(line: DialogueLine) -> str:
    speaker = line.speaker or "UNKNOWN"
    return f"[{line.interval.start_ms}-{line.interval.end_ms}] {speaker}: {line.text}"


def _block(lines: Iterable[str]) -> str:
    text = "\n".join(lines)
    return text if text.strip() else NONE_BLOCK


def _header(title: str, audience: str) -> str:
    return f"Drama Title: {title or 'Untitled'}\nTarget Audience Gender: {audience}\n"


CORRECT_DIALOGUE = """## Role
You review speech-recognition (ASR) output for a drama episode against subtitle text read from the frames (OCR). Both carry timestamps in milliseconds.

## Task
Fix speaker labels and wording in the ASR lines where the OCR text at a matching time clearly shows an error. OCR may contain unrelated on-screen text; ignore it.

## Output
Return every ASR line, in the same order, as a JSON list wrapped in <result> tags:
<result>
[{{"start_ms": 10000, "end_ms": 12000, "speaker": "A", "text": "corrected words"}}]
</result>

## Rules
1. Keep start_ms and end_ms of every line exactly as given. Never merge, split, drop or reorder lines.
2. Change a speaker only when it is clearly wrong.
3. Do not copy unrelated OCR text into the dialogue.

ASR:
{asr}

OCR:
{ocr}
"""

CAPTION = """## Role
You write scene narrations for a drama, keeping the plot continuous across scenes.

## Task
Describe what happens in the current video segment: key events, who does what to whom, motivations and emotional turns, and how it follows from the previous context. Reframe dialogue in narrative form rather than quoting it.

Current Video Segment:
{video}

Character Information:
{characters}

Dialogue:
{dialogue}

Previous Segment Context:
{context}

Reply with the narration text only.
"""

HIGHLIGHT = """## Role
You are a short-drama editor scoring how strongly each scene matches known highlight patterns.

{header}
## Output
Score every scene below, in order, as a JSON list wrapped in <result> tags:
<result>
[{{"episode": 1, "scene_id": 1, "reason": "why this score", "score": 3}},
 {{"episode": 1, "scene_id": 2, "reason": "why this score", "score": 0}}]
</result>
Use the episode and scene numbers exactly as given; they may not start at episode 1.

## Scoring
Add up the points of every pattern a scene matches. A scene matching nothing scores 0.

{rules}

## Scenes
{scenes}
"""

BOUNDARY = """## Role
You are a short-drama editor choosing where an advertisement cut should start and end around pre-selected highlight scenes.

{header}
Scenes tagged {hl} are the main attraction. Scenes tagged {start} may open the cut; scenes tagged {end} may close it. A scene can carry several tags.

## Output
For every scene tagged {start} or {end}, decide whether it works as the first or last scene. Reply with a JSON list wrapped in <result> tags:
<result>
[{{"episode": 1, "scene_id": 1, "thought": "reasoning", "starting": true, "ending": false}}]
</result>

## Guidance
- A good opening grabs attention at once and does not depend on earlier plot to make sense; scenes introducing characters or the premise work well.
- A good ending stays related to the highlight. Prefer endings that leave the viewer wanting the next part; a closed story arc or a neutral scene is also acceptable.

## Scenes
{scenes}
"""

PRUNE = """## Role
You are a short-drama editor tightening a pre-selected segment by removing redundant scenes.

{header}
Each scene is tagged {hl_scene} (a selling point) or {gen_scene} (plain or transitional, may be removed).

## Output
For each {gen_scene}, decide whether to delete it. Reply with a JSON list wrapped in <result> tags, or an empty list if nothing should go:
<result>
[{{"episode": 1, "scene_id": 3, "thought": "reasoning", "delete": true}}]
</result>

## Rules
1. Never delete a {hl_scene}.
2. Never delete the first or the last scene listed.
3. Keep the episode and scene numbers as given.
4. Delete sparingly; every removal risks breaking the storyline.

## Scenes
{scenes}
"""

_END2END_GUIDANCE = """Keep the key plot points and make sure the result plays smoothly. Include highlight moments where the narrative allows, using these scoring patterns as a guide:

{rules}

Open on something that grabs attention without needing earlier context. End on something related to the highlight, ideally leaving suspense."""

END2END_NARRATION = """## Role
You are a short-drama editor cutting an advertisement directly from scene descriptions.

{header}
## Task
""" + _END2END_GUIDANCE + """

## Output
List the scenes to keep as a JSON list wrapped in <result> tags:
<result>
[{{"episode": 1, "scene_id": 1, "thought": "why keep it"}}]
</result>

## Scenes
{scenes}
"""

END2END_ASR = """## Role
You are a short-drama editor cutting an advertisement directly from the dialogue transcript.

{header}
## Task
""" + _END2END_GUIDANCE + """

## Output
List the time spans to keep, in seconds from the start of the episode, as a JSON list wrapped in <result> tags:
<result>
[{{"episode": 1, "start_time": 0, "end_time": 14, "thought": "why keep it"}}]
</result>

## Dialogue
{dialogue}
"""

SCENE_MERGE = """## Role
You refine a scene segmentation of one drama episode. Neighbouring segments that are visually different but belong to the same scene (for example a close-up and a wide shot of one conversation) should be merged.

## Output
List merges of ADJACENT segments only, as a JSON list wrapped in <result> tags, or an empty list:
<result>
[{{"segments": [2, 3], "reason": "same conversation"}}]
</result>

## Segments
{segments}
"""

SPEAKER_VOTE = """## Role
You attribute dialogue lines to characters using what is visible, what is heard and what is said.

## Characters
{characters}

## Output
For each line give the most likely speaker and your confidence between 0 and 1, as a JSON list wrapped in <result> tags:
<result>
[{{"line_id": "e1-0001", "speaker": "A", "confidence": 0.9}}]
</result>

## Lines
{lines}
"""

CHARACTERS = """## Role
You extract the characters of a drama from its narrative text.

## Output
List each named character with short identity phrases and relations to other characters, as a JSON list wrapped in <result> tags:
<result>
[{{"name": "A", "descriptors": ["CEO"], "relationships": [["B", "wife"]]}}]
</result>

## Narrative
{narrative}
"""


def render_correction(asr: Sequence[DialogueLine], ocr_lines: Sequence[str]) -> str:
    return CORRECT_DIALOGUE.format(asr=_block(dialogue_line(l) for l in asr), ocr=_block(ocr_lines))


def render_caption(video: str, characters: Sequence[str], dialogue: Sequence[DialogueLine],
                   context: str) -> str:
    return CAPTION.format(
        video=video or NONE_BLOCK,
        characters=_block(characters),
        dialogue=_block(dialogue_line(l) for l in dialogue),
        context=context.strip() or NONE_BLOCK,
    )


def render_highlight(title: str, audience: str, rules: str, scenes: Sequence[Scene]) -> str:
    return HIGHLIGHT.format(header=_header(title, audience), rules=rules,
                            scenes=_block(scene_line(s) for s in scenes))


def render_boundary(title: str, audience: str, tagged: Sequence[tuple[Scene, Sequence[str]]]) -> str:
    return BOUNDARY.format(header=_header(title, audience), hl=HIGHLIGHT_TAG, start=START_TAG,
                           end=END_TAG, scenes=_block(scene_line(s, t) for s, t in tagged))


def render_prune(title: str, audience: str, tagged: Sequence[tuple[Scene, Sequence[str]]]) -> str:
    return PRUNE.format(header=_header(title, audience), hl_scene=HIGHLIGHT_SCENE_TAG,
                        gen_scene=GENERAL_SCENE_TAG, scenes=_block(scene_line(s, t) for s, t in tagged))


def render_end2end_narration(title: str, audience: str, rules: str, scenes: Sequence[Scene]) -> str:
    return END2END_NARRATION.format(header=_header(title, audience), rules=rules,
                                    scenes=_block(scene_line(s) for s in scenes))


def render_end2end_asr(title: str, audience: str, rules: str, dialogue: Sequence[DialogueLine]) -> str:
    lines = (
        f"Episode {l.interval.episode_id} [{l.interval.start_ms / 1000:.3f}s-"
        f"{l.interval.end_ms / 1000:.3f}s] {l.speaker or 'UNKNOWN'}: {l.text}"
        for l in dialogue
    )
    return END2END_ASR.format(header=_header(title, audience), rules=rules, dialogue=_block(lines))
