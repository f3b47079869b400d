"""Run a complete scripted subjective study and query it over HTTP.

Builds disjoint playlists, assigns subjects round-robin, scripts a full-
attendance run (every subject completes both sessions with the mandatory
rest gap), and exports the opinion table. Then exercises the same service
through its HTTP facade.
"""

import numpy as np
from fastapi.testclient import TestClient

from vqalab.study import StudyConfig, assign_subjects, build_playlists, simulate_full_study
from vqalab.study_api import create_app


def main():
    config = StudyConfig(playlist_count=4, playlist_size=12, group_count=4,
                         training_video_ids=["train0"])
    videos = [f"v{i:03d}" for i in range(48)]
    playlists = build_playlists(videos, config, seed=1)
    subjects = [f"subj{i:02d}" for i in range(8)]
    assignment = assign_subjects(subjects, config)

    rng = np.random.default_rng(0)
    service = simulate_full_study(config, playlists, assignment,
                                  score_fn=lambda s, v: float(rng.uniform(0, 100)))
    export = service.export_opinion_csv().strip().split("\n")
    per_video = {}
    for line in export[1:]:
        vid = line.split(",")[1]
        per_video[vid] = per_video.get(vid, 0) + 1
    counts = sorted(set(per_video.values()))
    print(f"export rows: {len(export) - 1}; ratings per video: {counts}")

    client = TestClient(create_app(service))
    print("health:", client.get("/healthz").json())
    print("unknown subject:", client.post("/subjects", json={"subject_id": "nobody"}).json())
    blocked = client.post("/sessions", json={"subject_id": "subj00"})
    print(f"third session attempt -> HTTP {blocked.status_code} {blocked.json()['error']}")


if __name__ == "__main__":
    main()
