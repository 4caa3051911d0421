"""Walk through the pacing escalation table, stall detectors and the guard.

Prints the directive level per exchange count for both profiles, fires each
of the three stagnation signals on constructed transcripts, and shows the
structure guard choosing patches down its priority list.
"""

from storyloop.memory import Clue, RollingSummary, StoryState
from storyloop.messages import Message, SceneTags
from storyloop.pacing import (
    PacingState,
    default_advice_keywords,
    detect_stagnation,
    directive_for,
    guard_patch,
)


def msg(i, author="user", content="", choice=None):
    return Message(message_id=f"m{i}", author=author, content=content or "text", choice_taken=choice)


def main() -> None:
    print("escalation by exchange count")
    print(f"{'count':>6}  {'benchmark_exchanges':<20} {'default_turns':<20}")
    for n in range(0, 30):
        bench = directive_for(n, "benchmark_exchanges").level.name
        turns = directive_for(n, "default_turns").level.name
        print(f"{n:>6}  {bench:<20} {turns:<20}")

    print("\nstagnation detectors")
    repeated = [
        msg(1, choice="Open the ledger"),
        msg(2, "narrator"),
        msg(3, choice="Open the ledger"),
    ]
    print("repeated choice   ->", detect_stagnation(repeated).repeated_choice)

    kws = default_advice_keywords()[:3]
    advice = [
        msg(1, "npc:a", f"{kws[0]}, {kws[1]}, {kws[2]}"),
        msg(2, "npc:a", f"{kws[0]} and {kws[1]} and {kws[2]}"),
    ]
    print("advice keywords   ->", detect_stagnation(advice).advice_keyword_count)

    summaries = (
        RollingSummary(1, "The door stays shut.", (1, 3)),
        RollingSummary(2, "  the door stays shut  ", (4, 6)),
    )
    print("summary stall     ->", detect_stagnation([], summaries=summaries).summary_stall)

    print("\nstructure guard priority")
    base = StoryState(
        current_goal="find the recipient",
        open_tensions=("the archive closes soon",),
        active_clues=(Clue("brass_key", "a brass key taped under the desk"),),
        current_location="reading_room",
    )
    directive = directive_for(9)
    signals = detect_stagnation(repeated)
    state = base
    registry = ("reading_room", "archive_stacks")
    goals = ("find the recipient", "earn the account")
    pacing = PacingState(forced_advancement=True, visited_locations=["reading_room"])
    for step in range(5):
        state, patch = guard_patch(
            SceneTags(), state, directive, signals, pacing,
            location_registry=registry, act_goals=goals,
        )
        if patch is None:
            break
        print(f"patch {step + 1}: {patch.kind:<20} {patch.payload}")
        # Exhaust the material each patch kind consumed so the next call
        # falls through to the next priority level.
        if patch.kind == "location_transition":
            pacing.visited_locations.append(state.current_location)
        elif patch.kind == "goal_change":
            goals = (state.current_goal,)
        elif patch.kind == "stakes_escalation":
            state = StoryState(
                current_goal=state.current_goal,
                open_tensions=(),
                active_clues=state.active_clues,
                current_location=state.current_location,
            )


if __name__ == "__main__":
    main()
