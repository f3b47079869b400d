/** Typed client for the study-service HTTP+JSON API. */

export interface SessionInfo {
  session_id: string;
  phase: string;
  playlist_id: number;
  session_index: number;
}

export interface NextItem {
  video_id: string;
  phase: "training" | "rating";
  position: number;
  total: number;
  stream_url: string;
}

export interface RatingAck {
  stored: boolean;
  video_id: string;
  phase: string;
  is_training: boolean;
}

/** Domain error reported by the service (4xx with an error envelope). */
export class ApiError extends Error {
  constructor(
    public readonly name: string,
    public readonly detail: string,
    public readonly status: number,
    public readonly remainingHours?: number,
  ) {
    super(`${name}: ${detail}`);
  }
}

/** Transport failure (offline, connection reset); the request may be retried. */
export class NetworkError extends Error {}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StudyApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown, requestId?: string): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (requestId) headers["X-Request-Id"] = requestId;
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new NetworkError(String(err));
    }
    const payload = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(
        String(payload["error"] ?? "UnknownError"),
        String(payload["detail"] ?? ""),
        response.status,
        typeof payload["remaining_hours"] === "number" ? payload["remaining_hours"] : undefined,
      );
    }
    return payload as T;
  }

  startSession(subjectId: string, requestId?: string): Promise<SessionInfo> {
    return this.request<SessionInfo>("POST", "/sessions", { subject_id: subjectId }, requestId);
  }

  nextItem(sessionId: string): Promise<NextItem> {
    return this.request<NextItem>("GET", `/sessions/${sessionId}/next`);
  }

  submitRating(sessionId: string, videoId: string, score: number, requestId?: string): Promise<RatingAck> {
    return this.request<RatingAck>(
      "POST",
      `/sessions/${sessionId}/ratings`,
      { video_id: videoId, score },
      requestId,
    );
  }
}
