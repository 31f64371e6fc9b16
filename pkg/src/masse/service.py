"""HTTP front end for a ServerStore.

Same semantics as the socket protocol: search bodies carry a serialized
token, owner messages carry a complete authenticated owner frame.
"""

from __future__ import annotations

import base64
import binascii

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from masse import codec
from masse.datamodel import StatusReply
from masse.protocol import Dispatcher, MsgType, Status, decode_frame
from masse.errors import FormatError, ProtocolError


class SearchRequest(BaseModel):
    token: str = Field(description="base64 of a serialized SearchToken")


class SearchResponse(BaseModel):
    results: list[str] = Field(description="base64 ciphertexts in counter order")


class OwnerFrameRequest(BaseModel):
    frame: str = Field(description="base64 of an authenticated owner frame")


class OwnerFrameResponse(BaseModel):
    status: str
    message: str = ""


class StoreStatus(BaseModel):
    curve: str
    security_bits: int
    tset: int
    xset: int
    cset: int
    clients: int
    tombstones: int
    last_owner_seq: int


def _b64(data: str) -> bytes:
    try:
        return base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise HTTPException(status_code=400, detail="invalid base64") from exc


def create_app(store, channel_key: bytes, on_change=None) -> FastAPI:
    app = FastAPI(title="masse server")
    dispatcher = Dispatcher(store, channel_key, on_change)

    @app.get("/status", response_model=StoreStatus)
    def status() -> StoreStatus:
        s = store.summary()
        return StoreStatus(security_bits=s.pop("lambda"), **s)

    @app.post("/search", response_model=SearchResponse)
    def search(req: SearchRequest) -> SearchResponse:
        body = _b64(req.token)
        mtype, reply = decode_frame(dispatcher.handle(MsgType.SEARCH_REQ, body))
        if mtype is MsgType.STATUS:
            st = codec.deserialize(reply, expect=StatusReply)
            raise HTTPException(status_code=400, detail=st.message)
        results = codec.deserialize(reply).results
        return SearchResponse(results=[base64.b64encode(e).decode() for e in results])

    @app.post("/owner", response_model=OwnerFrameResponse)
    def owner(req: OwnerFrameRequest) -> OwnerFrameResponse:
        try:
            mtype, body = decode_frame(_b64(req.frame))
        except (ProtocolError, FormatError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if mtype not in (MsgType.UPDATE, MsgType.REVOKE, MsgType.REGISTER_DICT):
            raise HTTPException(status_code=400, detail=f"not an owner message: {mtype.name}")
        _, reply = decode_frame(dispatcher.handle(mtype, body))
        st = codec.deserialize(reply, expect=StatusReply)
        code = Status(st.code)
        if code is Status.UNAUTHENTICATED:
            raise HTTPException(status_code=401, detail=st.message)
        if code is Status.REPLAYED:
            raise HTTPException(status_code=409, detail=st.message)
        if code is not Status.OK:
            raise HTTPException(status_code=400, detail=st.message)
        return OwnerFrameResponse(status=code.name, message=st.message)

    return app
