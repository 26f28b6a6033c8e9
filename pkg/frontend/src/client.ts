/**
 * TCP client for the simulator's serve endpoint.
 *
 * Wire protocol, one line per message:
 *   CMD <26 hex digits>   client -> simulator
 *   RSP <26 hex digits>   simulator -> client
 *   ERR <message>         simulator -> client
 */

import { Socket } from "node:net";

import {
  RequestFields,
  ResponseFields,
  decodeResponse,
  encodeCommand,
} from "./frames.js";

export class WireError extends Error {}

/** Line-oriented connection that resolves one reply per command sent. */
export class BridgeClient {
  private socket: Socket;
  private buffer = "";
  private waiters: Array<{
    resolve: (line: string) => void;
    reject: (err: Error) => void;
  }> = [];

  private constructor(socket: Socket) {
    this.socket = socket;
    socket.setEncoding("ascii");
    socket.on("data", (chunk: string) => this.onData(chunk));
    socket.on("error", (err) => this.failAll(err));
    socket.on("close", () => this.failAll(new WireError("connection closed")));
  }

  static connect(host: string, port: number): Promise<BridgeClient> {
    return new Promise((resolve, reject) => {
      const socket = new Socket();
      socket.once("error", reject);
      socket.connect(port, host, () => {
        socket.removeListener("error", reject);
        resolve(new BridgeClient(socket));
      });
    });
  }

  private onData(chunk: string): void {
    this.buffer += chunk;
    let index: number;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index).trim();
      this.buffer = this.buffer.slice(index + 1);
      const waiter = this.waiters.shift();
      if (waiter) {
        waiter.resolve(line);
      }
    }
  }

  private failAll(err: Error): void {
    for (const waiter of this.waiters.splice(0)) {
      waiter.reject(err);
    }
  }

  private readLine(): Promise<string> {
    return new Promise((resolve, reject) => {
      this.waiters.push({ resolve, reject });
    });
  }

  /** Send one raw command frame; returns the raw response frame hex. */
  async requestFrame(commandHex: string): Promise<string> {
    const pending = this.readLine();
    this.socket.write(`CMD ${commandHex}\n`);
    const reply = await pending;
    if (reply.startsWith("RSP ")) {
      return reply.slice(4).trim();
    }
    if (reply.startsWith("ERR ")) {
      throw new WireError(reply.slice(4));
    }
    throw new WireError(`malformed reply: ${reply}`);
  }

  /** Encode request fields, exchange frames, decode the response fields. */
  async request(fields: RequestFields): Promise<ResponseFields> {
    return decodeResponse(await this.requestFrame(encodeCommand(fields)));
  }

  close(): void {
    this.socket.destroy();
  }
}

/** One-shot convenience: connect, exchange a single request, disconnect. */
export async function sendRequest(
  host: string,
  port: number,
  fields: RequestFields,
): Promise<ResponseFields> {
  const client = await BridgeClient.connect(host, port);
  try {
    return await client.request(fields);
  } finally {
    client.close();
  }
}
