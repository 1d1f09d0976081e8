"""Chat-completions client for local servers (Ollama) and hosted APIs."""

import asyncio
import json
import logging
import random
import time
from dataclasses import dataclass
from typing import Awaitable, Callable, Optional

import httpx

from ..config import EndpointConfig
from ..credentials import redact, resolve_api_key
from ..errors import ConfigError, DataError, EndpointError

logger = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")
RETRYABLE_STATUS = frozenset({429})


@dataclass
class ChatResponse:
    """Response from the endpoint plus retry bookkeeping."""

    content: str
    model: str
    attempts: int
    latency_ms: float


class EmptyMessages(DataError):
    """A request needs at least one message."""


class UnknownRole(DataError):
    """Message role outside system/user/assistant."""


class AuthMissing(ConfigError):
    """The endpoint needs a key and the named environment variable is unset."""


class ChatError(EndpointError):
    """Base for request failures; carries the attempt count so far."""

    retryable = False
    attempts = 0


class Timeout(ChatError):
    """The request timed out."""

    retryable = True


class ConnectFailed(ChatError):
    """The endpoint could not be reached."""

    retryable = True


class HttpError(ChatError):
    """Non-2xx HTTP status."""

    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}" + (f": {detail}" if detail else ""))
        self.status = status
        self.retryable = status in RETRYABLE_STATUS or status >= 500


class MalformedResponse(ChatError):
    """2xx response without the expected chat-completions shape."""


class ExhaustedRetries(ChatError):
    """Every attempt failed; wraps the last error."""

    def __init__(self, last_error: ChatError, attempts: int):
        super().__init__(f"gave up after {attempts} attempts: {last_error}")
        self.last_error = last_error
        self.attempts = attempts


def build_request(
    messages: list[dict[str, str]],
    cfg: EndpointConfig,
    stream: bool = False,
) -> dict:
    """
    Build the chat-completions wire document.

    Args:
        messages: Ordered role/content dicts
        cfg: Endpoint settings (model, temperature, max tokens)
        stream: Ask for server-sent event streaming

    Returns:
        JSON-serializable request body
    """
    if not messages:
        raise EmptyMessages("a chat request needs at least one message")
    wire = []
    for message in messages:
        role = message.get("role")
        if role not in ROLES:
            raise UnknownRole(f"unknown message role: {role!r}")
        wire.append({"role": role, "content": message.get("content", "")})
    return {
        "model": cfg.model_name,
        "messages": wire,
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_output_tokens,
        "stream": stream,
    }


class ChatClient:
    """Client for OpenAI-compatible chat-completions endpoints."""

    def __init__(
        self,
        config: Optional[EndpointConfig] = None,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        sleep: Callable[[float], Awaitable[None]] = asyncio.sleep,
        rng: Optional[random.Random] = None,
    ):
        """
        Initialize the chat client.

        Args:
            config: Endpoint configuration. If None, uses default config.
            transport: Optional httpx transport (tests inject a MockTransport)
            sleep: Coroutine used for backoff waits
            rng: Jitter source
        """
        self.config = config or EndpointConfig()
        self._transport = transport
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._client: Optional[httpx.AsyncClient] = None
        self._api_key = resolve_api_key(self.config.api_key_env_var_name)

    def redact(self, text: str) -> str:
        """Remove the API key from text bound for logs or transcripts."""
        return redact(text, self._api_key)

    def check_auth(self) -> None:
        """Raise AuthMissing if the endpoint needs a key and none is set."""
        if self.config.requires_key and not self._api_key:
            raise AuthMissing(
                f"endpoint requires an API key; set {self.config.api_key_env_var_name}"
            )

    async def _get_client(self) -> httpx.AsyncClient:
        """Get or create the HTTP client."""
        if self._client is None or self._client.is_closed:
            self.check_auth()
            headers: dict[str, str] = {"Content-Type": "application/json"}
            if self._api_key:
                headers["Authorization"] = f"Bearer {self._api_key}"
            self._client = httpx.AsyncClient(
                base_url=self.config.base_url,
                headers=headers,
                timeout=self.config.timeout,
                transport=self._transport,
            )
        return self._client

    async def _send_once(self, client: httpx.AsyncClient, request: dict) -> tuple[str, str]:
        """One HTTP exchange. Returns (content, model)."""
        try:
            if request.get("stream"):
                return await self._send_streaming(client, request)
            response = await client.post("/chat/completions", json=request)
            response.raise_for_status()
            data = response.json()
            return data["choices"][0]["message"]["content"] or "", data.get(
                "model", request["model"]
            )
        except httpx.HTTPStatusError as e:
            detail = ""
            try:
                detail = e.response.json().get("error", {}).get("message", "")
            except Exception:
                detail = ""
            raise HttpError(e.response.status_code, self.redact(str(detail))) from e
        except httpx.TimeoutException as e:
            raise Timeout(f"request timed out after {self.config.timeout}s") from e
        except httpx.ConnectError as e:
            raise ConnectFailed(self.redact(f"cannot connect to {self.config.base_url}: {e}")) from e
        except httpx.RequestError as e:
            raise ConnectFailed(self.redact(f"request failed: {e}")) from e
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise MalformedResponse(f"unexpected response shape: {e}") from e

    async def _send_streaming(self, client: httpx.AsyncClient, request: dict) -> tuple[str, str]:
        """Concatenate streamed deltas in arrival order."""
        parts: list[str] = []
        model = request["model"]
        async with client.stream("POST", "/chat/completions", json=request) as response:
            if response.is_error:
                await response.aread()
            response.raise_for_status()
            async for line in response.aiter_lines():
                if not line.startswith("data:"):
                    continue
                data_str = line[5:].strip()
                if data_str == "[DONE]":
                    break
                try:
                    data = json.loads(data_str)
                    model = data.get("model", model)
                    content = data["choices"][0].get("delta", {}).get("content") or ""
                except (json.JSONDecodeError, KeyError, IndexError):
                    continue
                if content:
                    parts.append(content)
        return "".join(parts), model

    def _backoff(self, attempt: int) -> float:
        base = self.config.backoff_base
        return base * (2 ** (attempt - 1)) + self._rng.uniform(0, base)

    async def chat_full(self, request: dict) -> ChatResponse:
        """
        Send a request, retrying timeouts, 429 and 5xx with exponential backoff.

        Returns:
            ChatResponse with content, model, attempts and latency
        """
        client = await self._get_client()
        max_attempts = 1 + self.config.max_retries
        started = time.perf_counter()
        last_error: Optional[ChatError] = None
        for attempt in range(1, max_attempts + 1):
            try:
                content, model = await self._send_once(client, request)
                return ChatResponse(
                    content=content,
                    model=model,
                    attempts=attempt,
                    latency_ms=(time.perf_counter() - started) * 1000,
                )
            except ChatError as e:
                e.attempts = attempt
                if not e.retryable:
                    raise
                last_error = e
                if attempt < max_attempts:
                    delay = self._backoff(attempt)
                    logger.debug("attempt %d failed (%s); retrying in %.2fs", attempt, e, delay)
                    await self._sleep(delay)
        assert last_error is not None
        raise ExhaustedRetries(last_error, max_attempts) from last_error

    async def chat(self, request: dict) -> str:
        """Send a request and return the first choice's content verbatim."""
        response = await self.chat_full(request)
        return response.content

    async def close(self):
        """Close the HTTP client."""
        if self._client:
            await self._client.aclose()
            self._client = None

    async def __aenter__(self):
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        await self.close()
