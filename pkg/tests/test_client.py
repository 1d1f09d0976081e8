"""Tests for the chat-completions client and the batch runner."""

import asyncio
import json
import random
import re

import httpx
import pytest

from briefextract.config import EndpointConfig
from briefextract.corpus.cleaning import BriefingRecord, DropReason
from briefextract.errors import DataError
from briefextract.jsonl import read_jsonl
from briefextract.llm.batch import TranscriptStatus, build_messages, run_batch
from briefextract.llm.client import (
    AuthMissing,
    ChatClient,
    EmptyMessages,
    ExhaustedRetries,
    HttpError,
    MalformedResponse,
    UnknownRole,
    build_request,
)
from briefextract.prompts.templates import load_templates

MESSAGES = [{"role": "system", "content": "sys"}, {"role": "user", "content": "hi"}]


def endpoint(**overrides) -> EndpointConfig:
    settings = {"provider": "ollama", "base_url": "http://test/v1", "model_name": "test-model"}
    settings.update(overrides)
    return EndpointConfig(**settings)


def completion(content: str, model: str = "test-model") -> httpx.Response:
    return httpx.Response(
        200, json={"model": model, "choices": [{"message": {"role": "assistant", "content": content}}]}
    )


class FakeSleep:
    """Records backoff delays instead of sleeping."""

    def __init__(self):
        self.delays: list[float] = []

    async def __call__(self, delay: float) -> None:
        self.delays.append(delay)


def client_for(handler, cfg=None, sleep=None) -> ChatClient:
    return ChatClient(
        cfg or endpoint(),
        transport=httpx.MockTransport(handler),
        sleep=sleep or FakeSleep(),
        rng=random.Random(0),
    )


class TestBuildRequest:
    """Tests for build_request."""

    def test_shape(self):
        request = build_request(MESSAGES, endpoint(temperature=0.2, max_output_tokens=256))
        assert request == {
            "model": "test-model",
            "messages": MESSAGES,
            "temperature": 0.2,
            "max_tokens": 256,
            "stream": False,
        }

    def test_empty(self):
        with pytest.raises(EmptyMessages):
            build_request([], endpoint())

    def test_unknown_role(self):
        with pytest.raises(UnknownRole):
            build_request([{"role": "tool", "content": "x"}], endpoint())


class TestEndpointConfig:
    """Tests for provider defaults."""

    def test_ollama_defaults(self):
        cfg = EndpointConfig(provider="ollama", base_url="", model_name="")
        assert cfg.base_url == "http://localhost:11434/v1"
        assert cfg.model_name == "qwen2.5:7b"
        assert not cfg.requires_key

    def test_hosted_requires_key(self):
        assert EndpointConfig(provider="openai", base_url="", model_name="").requires_key


class TestChatClient:
    """Tests for ChatClient."""

    async def test_returns_content_verbatim(self):
        seen = []

        def handler(request):
            seen.append(json.loads(request.content))
            return completion('```json\n{"a": 1}\n```')

        client = client_for(handler)
        response = await client.chat_full(build_request(MESSAGES, endpoint()))
        await client.close()

        assert response.content == '```json\n{"a": 1}\n```'
        assert response.attempts == 1
        assert seen[0]["messages"] == MESSAGES

    async def test_retries_server_errors(self):
        statuses = iter([503, 429, 200])
        sleep = FakeSleep()

        def handler(request):
            status = next(statuses)
            return completion("ok") if status == 200 else httpx.Response(status)

        client = client_for(handler, sleep=sleep)
        response = await client.chat_full(build_request(MESSAGES, endpoint()))
        assert response.content == "ok"
        assert response.attempts == 3
        assert len(sleep.delays) == 2
        assert 1.0 <= sleep.delays[0] < 2.0 <= sleep.delays[1] < 3.0

    async def test_client_error_not_retried(self):
        calls = []

        def handler(request):
            calls.append(request)
            return httpx.Response(400, json={"error": {"message": "bad model"}})

        client = client_for(handler)
        with pytest.raises(HttpError) as exc_info:
            await client.chat(build_request(MESSAGES, endpoint()))
        assert exc_info.value.status == 400
        assert exc_info.value.attempts == 1
        assert "bad model" in str(exc_info.value)
        assert len(calls) == 1

    async def test_exhausted_retries(self):
        calls = []

        def handler(request):
            calls.append(request)
            return httpx.Response(500)

        client = client_for(handler, cfg=endpoint(max_retries=2))
        with pytest.raises(ExhaustedRetries) as exc_info:
            await client.chat(build_request(MESSAGES, endpoint()))
        assert len(calls) == 3
        assert exc_info.value.attempts == 3
        assert isinstance(exc_info.value.last_error, HttpError)

    async def test_timeout_and_connect_are_retried(self):
        failures = iter(
            [
                lambda r: httpx.ReadTimeout("slow", request=r),
                lambda r: httpx.ConnectError("refused", request=r),
            ]
        )

        def handler(request):
            make = next(failures, None)
            if make is not None:
                raise make(request)
            return completion("done")

        client = client_for(handler)
        response = await client.chat_full(build_request(MESSAGES, endpoint()))
        assert response.content == "done"
        assert response.attempts == 3

    async def test_malformed_response(self):
        client = client_for(lambda request: httpx.Response(200, json={"choices": []}))
        with pytest.raises(MalformedResponse):
            await client.chat(build_request(MESSAGES, endpoint()))

    async def test_streaming_concatenates_deltas(self):
        chunks = ["a", "b", "c"]
        body = "".join(
            f"data: {json.dumps({'model': 'm', 'choices': [{'delta': {'content': c}}]})}\n\n"
            for c in chunks
        )
        body += "data: [DONE]\n\n"

        def handler(request):
            assert json.loads(request.content)["stream"] is True
            return httpx.Response(200, content=body.encode(), headers={"content-type": "text/event-stream"})

        client = client_for(handler)
        response = await client.chat_full(build_request(MESSAGES, endpoint(), stream=True))
        assert response.content == "abc"
        assert response.model == "m"

    async def test_auth_missing(self, monkeypatch):
        monkeypatch.delenv("BRIEF_TEST_KEY", raising=False)
        cfg = endpoint(provider="openai", api_key_env_var_name="BRIEF_TEST_KEY")
        client = client_for(lambda request: completion("x"), cfg=cfg)
        with pytest.raises(AuthMissing):
            await client.chat(build_request(MESSAGES, cfg))

    async def test_bearer_key_and_redaction(self, monkeypatch):
        key = "sk-test-0123456789abcdef"
        monkeypatch.setenv("BRIEF_TEST_KEY", key)
        cfg = endpoint(provider="openai", api_key_env_var_name="BRIEF_TEST_KEY")

        def handler(request):
            assert request.headers["Authorization"] == f"Bearer {key}"
            return httpx.Response(401, json={"error": {"message": f"invalid key {key}"}})

        client = client_for(handler, cfg=cfg)
        with pytest.raises(HttpError) as exc_info:
            await client.chat(build_request(MESSAGES, cfg))
        assert key not in str(exc_info.value)
        assert "sk-t" in str(exc_info.value)


TEXT_NUMBER = re.compile(r"第(\d+)号")


class TestRunBatch:
    """Tests for run_batch."""

    @pytest.fixture
    def templates(self):
        return load_templates("en")

    @staticmethod
    def briefing_number(request: httpx.Request) -> int:
        user = json.loads(request.content)["messages"][1]["content"]
        return int(TEXT_NUMBER.search(user).group(1))

    @pytest.mark.parametrize("limit", [2, 4, 8])
    async def test_order_and_peak_concurrency(self, briefings, templates, limit):
        """Every trial fills exactly max_parallel slots and keeps input order."""
        cfg = endpoint(max_parallel_requests=limit)
        jitter = random.Random(limit)

        for _ in range(5):
            in_flight = 0
            peak = 0
            full = asyncio.Event()

            async def handler(request):
                nonlocal in_flight, peak
                in_flight += 1
                peak = max(peak, in_flight)
                if in_flight == limit:
                    full.set()
                await asyncio.wait_for(full.wait(), timeout=5)
                await asyncio.sleep(jitter.uniform(0, 0.002))
                in_flight -= 1
                return completion(f"out-{self.briefing_number(request)}")

            finished = []

            async def on_result(index, transcript):
                finished.append(index)

            client = client_for(handler, cfg=cfg)
            result = await run_batch(
                briefings[:24], templates, cfg, client=client, on_result=on_result
            )
            await client.close()

            assert peak == limit
            assert [t.record_id for t in result.transcripts] == [b.record_id for b in briefings[:24]]
            assert result.raw_outputs == [f"out-{i}" for i in range(24)]
            assert sorted(finished) == list(range(24))
            assert result.ok_count == 24

    async def test_single_slot_is_serial(self, briefings, templates):
        cfg = endpoint(max_parallel_requests=1)
        in_flight = 0
        peak = 0

        async def handler(request):
            nonlocal in_flight, peak
            in_flight += 1
            peak = max(peak, in_flight)
            await asyncio.sleep(0.001)
            in_flight -= 1
            return completion(f"out-{self.briefing_number(request)}")

        client = client_for(handler, cfg=cfg)
        result = await run_batch(briefings[:6], templates, cfg, client=client)
        await client.close()

        assert peak == 1
        assert result.raw_outputs == [f"out-{i}" for i in range(6)]

    async def test_retry_ceiling_does_not_abort_batch(self, briefings, templates):
        """A record that keeps failing is recorded; the others still complete."""
        cfg = endpoint(max_retries=2)
        calls: dict[int, int] = {}

        def handler(request):
            n = self.briefing_number(request)
            calls[n] = calls.get(n, 0) + 1
            if n == 1:
                return httpx.Response(503)
            return completion(f"out-{n}")

        sleep = FakeSleep()
        client = client_for(handler, cfg=cfg, sleep=sleep)
        result = await run_batch(briefings[:4], templates, cfg, client=client)
        await client.close()

        failed = result.transcripts[1]
        assert failed.status is TranscriptStatus.FAILED
        assert failed.attempts == 3
        assert "gave up after 3 attempts" in failed.error
        assert calls[1] == 3
        assert len(sleep.delays) == 2
        assert [t.ok for t in result.transcripts] == [True, False, True, True]
        assert result.raw_outputs[3] == "out-3"

    async def test_missing_key_fails_before_any_request(self, briefings, templates, monkeypatch):
        monkeypatch.delenv("BRIEF_TEST_KEY", raising=False)
        cfg = endpoint(provider="openai", api_key_env_var_name="BRIEF_TEST_KEY")
        calls = []

        def handler(request):
            calls.append(request)
            return completion("{}")

        client = client_for(handler, cfg=cfg)
        with pytest.raises(AuthMissing):
            await run_batch(briefings[:3], templates, cfg, client=client)
        assert calls == []

    async def test_failures_recorded(self, briefings, templates):
        cfg = endpoint(max_retries=0)

        def handler(request):
            n = self.briefing_number(request)
            if n == 1:
                return httpx.Response(400)
            if n == 2:
                return completion("")
            return completion("{}")

        client = client_for(handler, cfg=cfg)
        result = await run_batch(briefings[:4], templates, cfg, client=client)

        statuses = [t.status for t in result.transcripts]
        assert statuses == [
            TranscriptStatus.OK,
            TranscriptStatus.FAILED,
            TranscriptStatus.FAILED,
            TranscriptStatus.OK,
        ]
        assert "HTTP 400" in result.transcripts[1].error
        assert result.transcripts[2].error == "empty response"
        assert result.failed_count == 2
        assert not result.all_failed

    async def test_all_failed(self, briefings, templates):
        cfg = endpoint(max_retries=0)
        client = client_for(lambda request: httpx.Response(404), cfg=cfg)
        result = await run_batch(briefings[:3], templates, cfg, client=client)
        assert result.all_failed

    async def test_dropped_briefing_rejected(self, templates):
        dropped = BriefingRecord("x", "短", "x", 1, dropped=True, drop_reason=DropReason.TOO_SHORT)
        with pytest.raises(DataError):
            await run_batch([dropped], templates, endpoint())

    async def test_write(self, tmp_path, briefings, templates):
        cfg = endpoint()
        client = client_for(lambda request: completion("{}"), cfg=cfg)
        result = await run_batch(briefings[:2], templates, cfg, client=client)
        result.write(tmp_path / "transcripts.jsonl", tmp_path / "raw_outputs.jsonl")

        raw_rows = [row for _, row in read_jsonl(tmp_path / "raw_outputs.jsonl")]
        assert raw_rows == [
            {"record_id": "r000", "output": "{}", "status": "ok"},
            {"record_id": "r001", "output": "{}", "status": "ok"},
        ]
        _, transcript = next(iter(read_jsonl(tmp_path / "transcripts.jsonl")))
        assert [m["role"] for m in transcript["messages"]] == ["system", "user"]

    def test_few_shot_messages(self, briefings, templates):
        exemplars = [("示例通报一", '{"x":1}')]
        messages = build_messages(templates, briefings[0], exemplars, few_shot=1)
        assert messages[0]["content"] == templates.system_template
        user = messages[1]["content"]
        assert user.index("示例通报一") < user.index(briefings[0].text)
